#include "commands.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#ifndef VARBOUND_VERSION
#define VARBOUND_VERSION "0.0.0"
#endif

namespace varbound::cli {

namespace fs = std::filesystem;

namespace {

const KeyValueSection* module_section(const LoadedProblem& lp, const char* name,
                                      std::initializer_list<std::string_view> keys) {
    const KeyValueSection* sec = lp.doc.section(name);
    if (sec) sec->reject_unknown(keys);
    return sec;
}

template <class T, class Parse>
void read_key(const KeyValueSection* sec, const char* key, T& target, Parse parse) {
    if (!sec) return;
    if (const KeyValueEntry* e = sec->find(key)) target = parse(e->value, e->line);
}

int int_value(const std::string& v, int line) { return parse_int(v, line); }
double double_value(const std::string& v, int line) { return parse_double(v, line); }
bool bool_value(const std::string& v, int line) { return parse_bool(v, line); }

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

Table quantity_table() {
    Table t;
    t.header = {"quantity", "value"};
    return t;
}

void require_positive(int v, const char* what) {
    if (v < 0) throw std::invalid_argument(std::string(what) + " must be nonnegative");
}

}  // namespace

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string Table::csv() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << quote(cells[k]);
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
}

std::string Table::pretty() const {
    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t k = 0; k < header.size(); ++k) width[k] = header[k].size();
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < r.size() && k < width.size(); ++k) width[k] = std::max(width[k], r[k].size());
    }
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            os << (k ? "  " : "") << cells[k];
            if (k + 1 < cells.size()) os << std::string(width[k] - cells[k].size(), ' ');
        }
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
}

LoadedProblem load_problem_file(const fs::path& path, const RunConfig& config) {
    LoadedProblem lp;
    lp.path = path;
    lp.doc = KeyValueDocument::load(path);
    lp.exact = parse_problem(lp.doc);
    lp.problem = lp.exact.cast<double>();
    lp.problem.validate();
    lp.grid = parse_grid_section(lp.doc, lp.problem.layout, default_grid(lp.problem.layout));
    if (!config.grid_overrides.empty()) {
        lp.grid = apply_grid_overrides(lp.grid, config.grid_overrides, lp.problem.layout);
    }
    if (config.radius) {
        if (!(*config.radius > 0.0)) throw std::invalid_argument("--radius must be positive");
        lp.grid.radius = *config.radius;
    }
    lp.grid.validate(lp.problem.layout);
    return lp;
}

OmrSettings omr_settings(const LoadedProblem& lp, const RunConfig& config) {
    OmrSettings s;
    s.phi_degree = default_phi_degree(lp.exact);
    const auto* sec = module_section(lp, "omr", {"phi_degree", "h_degree"});
    read_key(sec, "phi_degree", s.phi_degree, int_value);
    read_key(sec, "h_degree", s.h_degree, int_value);
    if (config.phi_degree) s.phi_degree = *config.phi_degree;
    if (config.h_degree) s.h_degree = *config.h_degree;
    require_positive(s.phi_degree, "phi degree");
    require_positive(s.h_degree, "h degree");
    return s;
}

PdrOptions pdr_settings(const LoadedProblem& lp, const RunConfig& config) {
    PdrOptions o;
    o.grid = lp.grid;
    double radius = o.certify.radius;
    const auto* sec = module_section(lp, "pdr",
                                     {"phi_degree", "h_degree", "x_nodes", "rounds", "radius", "sigma_y", "free_l"});
    read_key(sec, "phi_degree", o.phi_degree, int_value);
    read_key(sec, "h_degree", o.h_degree, int_value);
    read_key(sec, "x_nodes", o.x_nodes, int_value);
    read_key(sec, "rounds", o.cutting_rounds, int_value);
    read_key(sec, "radius", radius, double_value);
    read_key(sec, "sigma_y", o.sigma_y_mode, bool_value);
    read_key(sec, "free_l", o.free_l, bool_value);
    if (config.phi_degree) o.phi_degree = *config.phi_degree;
    if (config.h_degree) o.h_degree = *config.h_degree;
    if (config.radius) radius = *config.radius;
    if (!(radius > 0.0)) throw std::invalid_argument("pdr radius must be positive");
    o.grid.radius = radius;
    o.certify.radius = radius;
    require_positive(o.phi_degree, "phi degree");
    require_positive(o.h_degree, "h degree");
    require_positive(o.cutting_rounds, "cutting rounds");
    if (o.x_nodes < 1) throw std::invalid_argument("x_nodes must be positive");
    return o;
}

SharpOptions sharp_settings(const LoadedProblem& lp, const RunConfig& config) {
    SharpOptions o;
    const auto* sec = module_section(lp, "sharp", {"convexify", "sigma_degree", "h_degree", "x_nodes", "radius"});
    read_key(sec, "convexify", o.dual.convexify, bool_value);
    read_key(sec, "sigma_degree", o.sigma_degree, int_value);
    read_key(sec, "h_degree", o.h_degree, int_value);
    read_key(sec, "x_nodes", o.dual.x_nodes, int_value);
    read_key(sec, "radius", o.certify.radius, double_value);
    if (config.convexify) o.dual.convexify = true;
    if (config.phi_degree) o.sigma_degree = *config.phi_degree;
    if (config.h_degree) o.h_degree = *config.h_degree;
    if (config.radius) o.certify.radius = *config.radius;
    require_positive(o.sigma_degree, "sigma degree");
    require_positive(o.h_degree, "h degree");
    return o;
}

UpperSettings upper_settings(const LoadedProblem& lp, const RunConfig& config) {
    UpperSettings s;
    s.elements = lp.problem.layout.n == 1 ? 64 : 8;
    s.fe.seed = config.seed;
    const auto* sec = module_section(lp, "upper", {"elements", "multistart", "tol", "refine"});
    read_key(sec, "elements", s.elements, int_value);
    read_key(sec, "multistart", s.fe.multistart, int_value);
    read_key(sec, "tol", s.fe.tolerance, double_value);
    read_key(sec, "refine", s.refine, int_value);
    if (config.elements) s.elements = *config.elements;
    if (config.multistart) s.fe.multistart = *config.multistart;
    if (config.refine) s.refine = *config.refine;
    // In sandwich, --tol is the weak-duality slack instead.
    if (config.tol && config.verb == "upper") s.fe.tolerance = *config.tol;
    if (s.elements < 1) throw std::invalid_argument("elements must be positive");
    if (s.fe.multistart < 1) throw std::invalid_argument("multistart must be positive");
    if (!(s.fe.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (s.refine < 1 || s.refine > 8) throw std::invalid_argument("refine must be between 1 and 8");
    return s;
}

OmrOutcome run_omr(const LoadedProblem& lp, const RunConfig& config) {
    OmrOutcome out;
    out.settings = omr_settings(lp, config);
    const OmrBases bases = default_bases(lp.problem.layout, out.settings.phi_degree, out.settings.h_degree);
    out.result = solve_omr(lp.problem, lp.grid, bases);
    if (out.result.ok()) out.extracted = extract_measure(out.result.measures, lp.problem, bases);
    return out;
}

PdrResult run_pdr(const LoadedProblem& lp, const RunConfig& config) {
    return solve_pdr(lp.problem, pdr_settings(lp, config));
}

SharpOutcome run_sharp(const LoadedProblem& lp, const RunConfig& config) {
    const SharpOptions o = sharp_settings(lp, config);
    SharpOutcome out;
    out.fields = solve_conjugate_dual_1d(lp.problem, o.dual);
    out.certificate = certificate_from_dual_fields(out.fields, lp.problem, o);
    return out;
}

std::vector<FeSolution> run_upper(const LoadedProblem& lp, const RunConfig& config) {
    const UpperSettings s = upper_settings(lp, config);
    std::vector<FeSolution> levels;
    int elements = s.elements;
    for (int k = 0; k < s.refine; ++k, elements *= 2) {
        levels.push_back(minimize_fe(lp.problem, Mesh::uniform(lp.problem.omega, elements), s.fe));
    }
    return levels;
}

VerifyOutcome run_verify_measure(const fs::path& file, const RunConfig& config) {
    const KeyValueDocument doc = KeyValueDocument::load(file);
    const MeasurePairFile header = read_measure_header(doc);
    if (header.problem_path.empty()) throw InputError("measure file names no problem");
    VerifyOutcome out;
    out.problem = load_problem(header.problem_path);
    const MeasurePairFile pair = parse_measure_pair(doc, out.problem);
    out.phi_degree = config.phi_degree.value_or(header.phi_degree.value_or(default_phi_degree(out.problem)));
    require_positive(out.phi_degree, "phi degree");
    const VarLayout L = out.problem.layout;
    const auto xs = monomial_x_basis<Surd>(L, out.phi_degree);
    out.report = check_membership(pair.mu, pair.nu, out.problem, monomial_phi_basis<Surd>(L, out.phi_degree), xs, xs);
    out.exact_zero = out.report.support_violation == 0.0;
    for (const auto* list : {&out.report.integral_residuals, &out.report.marginal_residuals,
                             &out.report.divergence_residuals}) {
        for (const auto& v : *list) out.exact_zero = out.exact_zero && is_zero(v);
    }
    out.max_residual = out.report.max_residual();
    out.passed = config.exact ? out.exact_zero : out.max_residual <= config.tol.value_or(1e-9);
    return out;
}

SandwichOutcome run_sandwich(const LoadedProblem& lp, const RunConfig& config) {
    SandwichOutcome out;
    out.upper = run_upper(lp, config).back();
    out.omr = run_omr(lp, config);
    if (!out.omr.result.ok()) throw NumericalFailure("omr: " + out.omr.result.message);
    out.pdr = run_pdr(lp, config);
    if (!out.pdr.ok()) throw NumericalFailure("pdr: " + out.pdr.message);
    out.report = weak_duality_report(out.omr.result.value, out.pdr.certificate, out.upper.energy,
                                     config.tol.value_or(1e-4));
    return out;
}

namespace {

std::string certificate_text(const DualCertificate& cert, const fs::path& problem) {
    std::ostringstream os;
    write_certificate(os, cert, fs::absolute(problem).lexically_normal().string());
    return os.str();
}

void add_certificate_rows(Table& t, const DualCertificate& c) {
    t.add({"raw_value", number(c.raw_value)});
    t.add({"certified_value", number(c.certified_value)});
    t.add({"min_F", number(c.record.min_F)});
    t.add({"min_G", number(c.record.min_G)});
    t.add({"shift_h", number(c.record.shift_h)});
    t.add({"shift_l", number(c.record.shift_l)});
    t.add({"search_radius", number(c.record.radius)});
    t.add({"verified", yes_no(c.record.verified)});
}

VerbResult verb_omr(const RunConfig& config) {
    const LoadedProblem lp = load_problem_file(config.input, config);
    const OmrOutcome o = run_omr(lp, config);
    Table t = quantity_table();
    t.add({"status", to_string(o.result.lp.status)});
    t.add({"value", number(o.result.value)});
    t.add({"phi_degree", std::to_string(o.settings.phi_degree)});
    t.add({"h_degree", std::to_string(o.settings.h_degree)});
    t.add({"gamma_nodes", std::to_string(o.result.gamma_nodes)});
    t.add({"lambda_nodes", std::to_string(o.result.lambda_nodes)});
    t.add({"rows", std::to_string(o.result.rows)});
    VerbResult r;
    if (o.result.ok()) {
        t.add({"membership_residual", number(o.extracted.report.max_residual())});
        t.add({"support_violation", number(o.extracted.report.support_violation)});
        t.add({"extracted_objective", number(o.extracted.report.objective_value)});
        std::ostringstream m;
        write_grid_measure_csv(m, o.result.measures, lp.problem.layout);
        r.artifacts.push_back({"omr_measure.csv", m.str()});
    } else {
        r.status = 1;
    }
    r.artifacts.insert(r.artifacts.begin(), {"omr.csv", t.csv()});
    r.summary = t.pretty() + (o.result.message.empty() ? "" : o.result.message + "\n");
    return r;
}

VerbResult verb_pdr(const RunConfig& config) {
    const LoadedProblem lp = load_problem_file(config.input, config);
    const PdrResult p = run_pdr(lp, config);
    Table t = quantity_table();
    t.add({"status", to_string(p.status)});
    t.add({"lp_value", number(p.lp_value)});
    add_certificate_rows(t, p.certificate);
    t.add({"rounds", std::to_string(p.rounds)});
    t.add({"bulk_nodes", std::to_string(p.bulk_nodes)});
    t.add({"boundary_nodes", std::to_string(p.boundary_nodes)});
    VerbResult r;
    r.status = p.ok() ? 0 : 1;
    r.artifacts.push_back({"pdr.csv", t.csv()});
    r.artifacts.push_back({"pdr.cert", certificate_text(p.certificate, lp.path)});
    r.summary = t.pretty() + (p.message.empty() ? "" : p.message + "\n");
    return r;
}

VerbResult verb_sharp(const RunConfig& config) {
    const LoadedProblem lp = load_problem_file(config.input, config);
    const SharpOutcome s = run_sharp(lp, config);
    Table t = quantity_table();
    t.add({"dual_objective", number(s.fields.objective)});
    t.add({"iterations", std::to_string(s.fields.iterations)});
    t.add({"converged", yes_no(s.fields.converged)});
    t.add({"coercive", yes_no(s.fields.coercive)});
    t.add({"linear_f1", yes_no(s.fields.linear_f1)});
    add_certificate_rows(t, s.certificate);
    Table fields;
    fields.header = {"x", "sigma", "rho"};
    for (std::size_t k = 0; k < s.fields.x.size(); ++k) {
        fields.add({number(s.fields.x[k]), number(s.fields.sigma[k]), number(s.fields.rho[k])});
    }
    VerbResult r;
    r.artifacts.push_back({"sharp.csv", t.csv()});
    r.artifacts.push_back({"sharp_fields.csv", fields.csv()});
    r.artifacts.push_back({"sharp.cert", certificate_text(s.certificate, lp.path)});
    r.summary = t.pretty();
    for (const auto& w : s.fields.warnings) r.summary += "warning: " + w + "\n";
    return r;
}

VerbResult verb_upper(const RunConfig& config) {
    const LoadedProblem lp = load_problem_file(config.input, config);
    const auto levels = run_upper(lp, config);
    Table t;
    t.header = {"elements", "h", "energy", "iterations", "converged"};
    Table starts;
    starts.header = {"elements", "start", "seed", "energy", "iterations", "converged"};
    bool all_converged = true;
    for (const auto& s : levels) {
        const std::string elements = std::to_string(s.mesh.cells.size());
        t.add({elements, number(s.mesh.h), number(s.energy), std::to_string(s.iterations), yes_no(s.converged)});
        all_converged = all_converged && s.converged;
        for (const auto& st : s.starts) {
            starts.add({elements, std::to_string(st.index), std::to_string(st.seed), number(st.energy),
                        std::to_string(st.iterations), yes_no(st.converged)});
        }
    }
    VerbResult r;
    r.artifacts.push_back({"upper.csv", t.csv()});
    r.artifacts.push_back({"upper_starts.csv", starts.csv()});
    if (config.dump) {
        const FeSolution& fine = levels.back();
        Table nodes;
        for (int i = 0; i < fine.mesh.dim; ++i) nodes.header.push_back("x" + std::to_string(i + 1));
        for (int j = 0; j < fine.components; ++j) nodes.header.push_back("u" + std::to_string(j + 1));
        for (int a = 0; a < fine.mesh.num_nodes(); ++a) {
            std::vector<std::string> row;
            for (int i = 0; i < fine.mesh.dim; ++i) row.push_back(number(fine.mesh.nodes[a][i]));
            for (int j = 0; j < fine.components; ++j) row.push_back(number(fine.values[a * fine.components + j]));
            nodes.add(row);
        }
        r.artifacts.push_back({"upper_nodes.csv", nodes.csv()});
    }
    r.summary = t.pretty();
    if (!all_converged) r.summary += "warning: iteration limit reached on some level\n";
    return r;
}

VerbResult verb_verify(const RunConfig& config) {
    const VerifyOutcome v = run_verify_measure(config.input, config);
    std::ostringstream os;
    v.report.write_csv(os);
    VerbResult r;
    r.status = v.passed ? 0 : 1;
    r.artifacts.push_back({"verify.csv", os.str()});
    r.summary = "phi degree " + std::to_string(v.phi_degree) + ", " +
                std::to_string(v.report.integral_residuals.size() + v.report.marginal_residuals.size() +
                               v.report.divergence_residuals.size()) +
                " rows, max residual " + number(v.max_residual) +
                (v.exact_zero ? ", all residuals exactly zero" : "") + (v.passed ? ": PASS\n" : ": FAIL\n");
    return r;
}

VerbResult verb_sandwich(const RunConfig& config) {
    const LoadedProblem lp = load_problem_file(config.input, config);
    const SandwichOutcome s = run_sandwich(lp, config);
    Table t = quantity_table();
    t.add({"pdr_certified", number(s.pdr.certificate.certified_value)});
    t.add({"omr", number(s.omr.result.value)});
    t.add({"upper", number(s.upper.energy)});
    t.add({"upper_elements", std::to_string(s.upper.mesh.cells.size())});
    t.add({"tolerance", number(s.report.tolerance)});
    t.add({"consistent", yes_no(s.report.consistent)});
    t.add({"verdict", s.report.verdict});
    VerbResult r;
    r.status = s.report.consistent ? 0 : 1;
    r.artifacts.push_back({"sandwich.csv", t.csv()});
    r.artifacts.push_back({"pdr.cert", certificate_text(s.pdr.certificate, lp.path)});
    r.summary = t.pretty();
    return r;
}

VerbResult verb_examples(const RunConfig& config) {
    const fs::path dir = config.data_dir / "problems";
    if (!fs::is_directory(dir)) throw InputError("example directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    Table t;
    t.header = {"instance", "upper", "omr", "pdr", "sharp", "oracle", "consistent"};
    VerbResult r;
    for (const auto& f : files) {
        RunConfig c = config;
        c.input = f;
        const LoadedProblem lp = load_problem_file(f, c);
        const SandwichOutcome s = run_sandwich(lp, c);
        std::string sharp = "n/a";
        bool separable = true;
        try {
            split_convex_additive(lp.problem);
        } catch (const std::invalid_argument&) {
            separable = false;
        }
        if (separable) {
            try {
                sharp = number(run_sharp(lp, c).certificate.certified_value);
            } catch (const FitError&) {
                sharp = "fit-failed";
            }
        }
        const std::string name = lp.problem.name.empty() ? f.stem().string() : lp.problem.name;
        t.add({name, number(s.upper.energy), number(s.omr.result.value), number(s.pdr.certificate.certified_value),
               sharp, lp.problem.oracle ? number(*lp.problem.oracle) : "", yes_no(s.report.consistent)});
        if (!s.report.consistent) r.status = 1;
    }
    r.artifacts.push_back({"examples.csv", t.csv()});
    r.summary = t.pretty();
    return r;
}

}  // namespace

VerbResult run(const RunConfig& config) {
    if (config.verb == "omr") return verb_omr(config);
    if (config.verb == "pdr") return verb_pdr(config);
    if (config.verb == "sharp") return verb_sharp(config);
    if (config.verb == "upper") return verb_upper(config);
    if (config.verb == "verify-measure") return verb_verify(config);
    if (config.verb == "sandwich") return verb_sandwich(config);
    if (config.verb == "examples") return verb_examples(config);
    throw std::invalid_argument("unknown verb '" + config.verb + "'");
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_outputs(const RunConfig& config, const VerbResult& result, const std::string& started_utc) {
    fs::create_directories(config.out);
    nlohmann::json manifest;
    manifest["tool"] = "varbound";
    manifest["version"] = VARBOUND_VERSION;
    manifest["verb"] = config.verb;
    manifest["argv"] = config.argv;
    manifest["seed"] = config.seed;
    manifest["started_utc"] = started_utc;
    manifest["finished_utc"] = utc_now();
    manifest["status"] = result.status;
    nlohmann::json inputs = nlohmann::json::array();
    if (!config.input.empty()) {
        nlohmann::json in;
        in["path"] = fs::absolute(config.input).lexically_normal().string();
        std::error_code ec;
        const auto size = fs::file_size(config.input, ec);
        if (!ec) in["bytes"] = size;
        inputs.push_back(in);
    }
    manifest["inputs"] = inputs;
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& a : result.artifacts) {
        std::ofstream os(config.out / a.name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (config.out / a.name).string());
        os << a.body;
        outputs.push_back(a.name);
    }
    manifest["outputs"] = outputs;
    std::ofstream m(config.out / "manifest.json");
    m << manifest.dump(2) << '\n';
}

}  // namespace varbound::cli
