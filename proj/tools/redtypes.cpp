// redtypes: reduction types of curves from the command line.
//
//   redtypes chain outer M D          multiplicities of an outer chain
//   redtypes chain inner M D M2 D2 N  multiplicities of an inner chain
//   redtypes onepath A/B C/D          shortest 1-path between fractions
//   redtypes cores --chi X            cores of Euler characteristic X
//   redtypes types --chi X            principal types, optionally by shape
//   redtypes shapes --genus G         shapes of reduction families
//   redtypes families --genus G       reduction families, sorted by label
//   redtypes validate FILE            check a JSON fibre
//   redtypes genus FILE               total genus of a JSON fibre
//   redtypes label FILE               canonical label of a JSON fibre
//   redtypes parse LABEL              rebuild a fibre from its label
//   redtypes selftest                 run the acceptance suite
//
// Exit codes: 0 ok, 1 domain error, 2 usage error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "redtypes/chains.hpp"
#include "redtypes/classify.hpp"
#include "redtypes/fibre.hpp"
#include "redtypes/label.hpp"

using namespace redtypes;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Fraction parse_fraction(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Fraction(std::stoll(s), 1);
    return Fraction(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

std::string join(const ChainSequence& seq) {
    std::string s;
    for (size_t i = 0; i < seq.size(); i++) {
        if (i) s += ' ';
        s += std::to_string(seq[i]);
    }
    return s;
}

std::string core_str(const Core& c) {
    std::string s = std::to_string(c.m) + "^{";
    for (size_t i = 0; i < c.residues.size(); i++) {
        if (i) s += ',';
        s += std::to_string(c.residues[i]);
    }
    return s + "}";
}

std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (size_t i = 0; i < s.chis.size(); i++) {
        if (i) out += ',';
        out += std::to_string(s.chis[i]);
    }
    out += ")";
    for (auto& [uv, w] : s.edges) {
        out += " " + std::to_string(uv.first) + "-" + std::to_string(uv.second) + ":[";
        for (size_t i = 0; i < w.size(); i++) {
            if (i) out += ',';
            out += std::to_string(w[i]);
        }
        out += "]";
    }
    return out;
}

int run_selftest(const std::string& exe);

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reduction types of curves"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "emit JSON instead of aligned text");
    int jobs = int(std::thread::hardware_concurrency());
    app.add_option("--jobs", jobs, "enumeration worker threads");

    auto* chain = app.add_subcommand("chain", "chain multiplicities from a type")->fallthrough();
    std::string chain_kind;
    std::vector<std::string> chain_args;
    bool have_depth = false;
    Int chain_depth = 0;
    chain->add_option("kind", chain_kind, "outer | inner")->required();
    chain->add_option("args", chain_args, "M D (outer) or M D M2 D2 N (inner)")->required();
    chain->add_option("--depth", chain_depth, "depth of an inner chain (may be negative)")
        ->each([&](const std::string&) { have_depth = true; });

    auto* onepath = app.add_subcommand("onepath", "shortest 1-path between fractions")->fallthrough();
    std::string frac_a, frac_b;
    onepath->add_option("a", frac_a)->required();
    onepath->add_option("b", frac_b)->required();

    auto* cores = app.add_subcommand("cores", "cores with a given Euler characteristic")->fallthrough();
    Int opt_chi = 0;
    cores->add_option("--chi", opt_chi)->required();

    auto* types = app.add_subcommand("types", "principal types with a given chi")->fallthrough();
    Int types_chi = 0;
    bool by_shape = false;
    types->add_option("--chi", types_chi)->required();
    types->add_flag("--by-shape", by_shape, "group by shape (chi; weights)");

    auto* shapes = app.add_subcommand("shapes", "shapes of reduction families")->fallthrough();
    Int shapes_genus = 2;
    bool shapes_extended = false;
    shapes->add_option("--genus", shapes_genus)->required();
    shapes->add_flag("--extended", shapes_extended);

    auto* families = app.add_subcommand("families", "reduction families of a genus")->fallthrough();
    Int fam_genus = 2;
    bool fam_count = false, fam_semistable = false, fam_extended = false;
    families->add_option("--genus", fam_genus)->required();
    families->add_flag("--count", fam_count, "print only the number of families");
    families->add_flag("--semistable", fam_semistable);
    families->add_flag("--extended", fam_extended);

    auto* validate_cmd = app.add_subcommand("validate", "validate a JSON fibre")->fallthrough();
    std::string validate_file;
    validate_cmd->add_option("file", validate_file)->required();

    auto* genus_cmd = app.add_subcommand("genus", "total genus of a JSON fibre")->fallthrough();
    std::string genus_file;
    genus_cmd->add_option("file", genus_file)->required();

    auto* label_cmd = app.add_subcommand("label", "canonical label of a JSON fibre")->fallthrough();
    std::string label_file;
    label_cmd->add_option("file", label_file)->required();

    auto* parse_cmd = app.add_subcommand("parse", "fibre from a label")->fallthrough();
    std::string parse_text;
    parse_cmd->add_option("label", parse_text)->required();

    auto* selftest = app.add_subcommand("selftest", "run the acceptance suite")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (jobs < 1) jobs = 1;

    try {
        if (chain->parsed()) {
            std::vector<Int> cargs;
            for (auto& s : chain_args) cargs.push_back(std::stoll(s));
            if (chain_kind == "outer") {
                if (cargs.size() != 2) {
                    std::cerr << "chain outer needs M D\n";
                    return 2;
                }
                std::cout << join(outer_sequence({cargs[0], cargs[1]})) << "\n";
            } else if (chain_kind == "inner") {
                if (have_depth && cargs.size() == 4) cargs.push_back(chain_depth);
                if (cargs.size() != 5) {
                    std::cerr << "chain inner needs M D M2 D2 N (N also via --depth)\n";
                    return 2;
                }
                std::cout << join(inner_sequence({cargs[0], cargs[1], cargs[2], cargs[3],
                                                  cargs[4]}))
                          << "\n";
            } else {
                std::cerr << "chain kind must be outer or inner\n";
                return 2;
            }
        } else if (onepath->parsed()) {
            auto path = shortest_one_path(parse_fraction(frac_a), parse_fraction(frac_b));
            std::string s;
            for (size_t i = 0; i < path.size(); i++) {
                if (i) s += ' ';
                s += to_string(path[i]);
            }
            std::cout << s << "\n";
        } else if (cores->parsed()) {
            auto cs = enumerate_cores(opt_chi);
            if (as_json) {
                nlohmann::json j = nlohmann::json::array();
                for (auto& c : cs) j.push_back({{"m", c.m}, {"residues", c.residues}});
                std::cout << j.dump() << "\n";
            } else {
                for (auto& c : cs) std::cout << core_str(c) << "\n";
            }
        } else if (types->parsed()) {
            auto ts = enumerate_principal_types(types_chi);
            if (by_shape) {
                std::map<std::vector<Int>, std::vector<std::string>> groups;
                for (auto& t : ts) groups[t.weights()].push_back(standalone_label(t));
                for (auto& [w, labels] : groups) {
                    std::cout << "(" << types_chi << ";";
                    for (size_t i = 0; i < w.size(); i++) std::cout << (i ? "," : " ") << w[i];
                    std::cout << ") " << labels.size() << "\n";
                    for (auto& l : labels) std::cout << "  " << l << "\n";
                }
            } else {
                for (auto& t : ts) std::cout << standalone_label(t) << "\n";
            }
        } else if (shapes->parsed()) {
            auto ss = enumerate_shapes(shapes_genus, shapes_extended);
            std::cout << ss.size() << " shapes\n";
            for (auto& s : ss) std::cout << shape_str(s) << "\n";
        } else if (families->parsed()) {
            std::vector<Family> fams = fam_semistable
                                           ? enumerate_semistable_families(fam_genus, jobs)
                                           : enumerate_families(fam_genus, jobs, fam_extended);
            if (fam_count) {
                std::cout << fams.size() << "\n";
            } else if (as_json) {
                nlohmann::json j = nlohmann::json::array();
                for (auto& f : fams)
                    j.push_back({{"label", f.label},
                                 {"fibre", nlohmann::json::parse(fibre_to_json(assemble(f.data)))}});
                std::cout << j.dump() << "\n";
            } else {
                for (auto& f : fams) std::cout << f.label << "\n";
            }
        } else if (validate_cmd->parsed()) {
            Fibre f = fibre_from_json(read_file(validate_file));
            auto bad = validate(f);
            if (bad.empty()) {
                std::cout << "ok\n";
            } else {
                for (auto& b : bad) std::cout << b << "\n";
                return 1;
            }
        } else if (genus_cmd->parsed()) {
            Fibre f = fibre_from_json(read_file(genus_file));
            std::cout << total_genus(f) << "\n";
        } else if (label_cmd->parsed()) {
            Fibre f = fibre_from_json(read_file(label_file));
            std::cout << canonical_label(f) << "\n";
        } else if (parse_cmd->parsed()) {
            Fibre f = parse_label(parse_text);
            if (as_json)
                std::cout << fibre_to_json(f) << "\n";
            else
                std::cout << fibre_to_json(f, true) << "\n";
        } else if (selftest->parsed()) {
            return run_selftest(argv[0]);
        }
    } catch (const parse_error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const chain_error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const fibre_error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}

namespace {

int run_selftest(const std::string& exe) {
    // the acceptance binary sits next to the CLI in the build tree
    std::string dir = exe;
    auto slash = dir.find_last_of('/');
    dir = slash == std::string::npos ? "." : dir.substr(0, slash);
    std::string fixtures = dir + "/../tests/fixtures";
    const char* env = std::getenv("REDTYPES_FIXTURES");
    if (env) fixtures = env;
    std::string cmd = dir + "/tests/acceptance --fixtures " + fixtures;
    int rc = std::system(cmd.c_str());
    return rc == 0 ? 0 : 1;
}

}  // namespace
