#include "cli.hpp"

#include "cdlayer/analysis.hpp"
#include "cdlayer/calculus.hpp"
#include "cdlayer/error.hpp"
#include "cdlayer/fem.hpp"
#include "cdlayer/mesh.hpp"
#include "cdlayer/problem.hpp"
#include "cdlayer/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace cdlayer::cli {

namespace {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<bool> in_csv;  // false for JSON/pretty-only columns
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> notes;  // pretty output only

    void add_column(std::string name, bool csv = true)
    {
        columns.push_back(std::move(name));
        in_csv.push_back(csv);
    }
};

std::string full_precision(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_precision(double v)
{
    if (std::isnan(v)) return "-";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_field(const Cell& cell)
{
    if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isnan(*d)) return "";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        return full_precision(*d);
    }
    if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
    const auto& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string json_string(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof buf, "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out + "\"";
}

std::string json_number(double v)
{
    return std::isfinite(v) ? full_precision(v) : "null";
}

std::string json_value(const Cell& cell)
{
    if (const auto* d = std::get_if<double>(&cell)) return json_number(*d);
    if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
    const auto& s = std::get<std::string>(cell);
    return s.empty() ? "null" : json_string(s);
}

std::string json_list(const std::vector<double>& values)
{
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += json_number(values[i]);
    }
    return out + "]";
}

std::string_view format_name(Format f)
{
    switch (f) {
    case Format::Csv: return "csv";
    case Format::Json: return "json";
    case Format::Pretty: return "pretty";
    }
    return "csv";
}

void write_csv(const Table& t, std::ostream& out)
{
    bool first = true;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (!t.in_csv[c]) continue;
        out << (first ? "" : ",") << t.columns[c];
        first = false;
    }
    out << '\n';
    for (const auto& row : t.rows) {
        first = true;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!t.in_csv[c]) continue;
            out << (first ? "" : ",") << csv_field(row[c]);
            first = false;
        }
        out << '\n';
    }
}

void write_json(const Table& t, const RunConfig& cfg, std::ostream& out)
{
    out << "{\"meta\":{\"subcommand\":" << json_string(cfg.subcommand)
        << ",\"scenario\":" << json_string(cfg.scenario) << ",\"eps0\":" << json_list(cfg.eps0)
        << ",\"h\":" << json_list(cfg.h) << ",\"delta\":" << json_number(cfg.delta)
        << ",\"format\":" << json_string(format_name(cfg.format)) << ",\"seed\":" << cfg.seed
        << ",\"exact\":" << (cfg.exact ? "true" : "false") << ",\"suite\":" << json_string(cfg.suite)
        << ",\"version\":" << json_string(kVersion) << "},\"rows\":[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out << (r ? "," : "") << "{";
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            out << (c ? "," : "") << json_string(t.columns[c]) << ":" << json_value(t.rows[r][c]);
        }
        out << "}";
    }
    out << "]}\n";
}

void write_pretty(const Table& t, std::ostream& out)
{
    std::vector<std::vector<std::string>> text;
    std::vector<std::size_t> width(t.columns.size());
    for (std::size_t c = 0; c < t.columns.size(); ++c) width[c] = t.columns[c].size();
    for (const auto& row : t.rows) {
        auto& line = text.emplace_back();
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::string s;
            if (const auto* d = std::get_if<double>(&row[c])) {
                s = short_precision(*d);
            } else if (const auto* i = std::get_if<long long>(&row[c])) {
                s = std::to_string(*i);
            } else {
                s = std::get<std::string>(row[c]);
            }
            width[c] = std::max(width[c], s.size());
            line.push_back(std::move(s));
        }
    }
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            out << (c ? "  " : "") << cells[c];
            if (c + 1 < cells.size()) out << std::string(width[c] - cells[c].size(), ' ');
        }
        out << '\n';
    };
    emit(t.columns);
    for (const auto& line : text) emit(line);
    for (const auto& note : t.notes) out << note << '\n';
}

void write_table(const Table& t, const RunConfig& cfg, std::ostream& out)
{
    switch (cfg.format) {
    case Format::Csv: write_csv(t, out); break;
    case Format::Json: write_json(t, cfg, out); break;
    case Format::Pretty: write_pretty(t, out); break;
    }
}

long long as_int(std::size_t v)
{
    return static_cast<long long>(v);
}

Table mesh_table(const RunConfig& cfg)
{
    const Scenario s = make_scenario(cfg.scenario, cfg.eps0.front());
    const auto e = layer_integral(s.coeffs, LayerIntegralKind::E);
    const LayerMesh mesh = build_mesh(s.coeffs, e, cfg.h.front(), cfg.delta);
    Table t;
    t.add_column("i");
    t.add_column("x");
    t.add_column("region");
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        t.rows.push_back({as_int(i), mesh.nodes[i],
                          std::string(mesh.region(i) == MeshRegion::Graded ? "graded" : "coarse")});
    }
    t.notes.push_back("tau* = " + short_precision(mesh.tau_star) + ", tau = " + short_precision(mesh.tau()) +
                      ", N* = " + std::to_string(mesh.n_star) + ", nodes = " + std::to_string(mesh.size()));
    try {
        t.notes.push_back("predicted cardinality = " + short_precision(predict_cardinality(s.coeffs, mesh.h)));
    } catch (const Error&) {
    }
    return t;
}

Table solve_table(const RunConfig& cfg)
{
    const Scenario s = make_scenario(cfg.scenario, cfg.eps0.front());
    if (cfg.exact && !s.exact) {
        throw Error(ErrorKind::Configuration, "scenario '" + s.name + "' has no closed-form solution");
    }
    const auto e = layer_integral(s.coeffs, LayerIntegralKind::E);
    const FemSolution sol = galerkin_solve(s, build_mesh(s.coeffs, e, cfg.h.front(), cfg.delta));
    Table t;
    t.add_column("i");
    t.add_column("x");
    t.add_column("u_h");
    if (cfg.exact) {
        t.add_column("u");
        t.add_column("error");
    }
    const auto x = sol.nodes();
    const auto u = sol.coefficients();
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<Cell> row{as_int(i), x[i], u[i]};
        if (cfg.exact) {
            const double exact = (*s.exact)(x[i]);
            row.emplace_back(exact);
            row.emplace_back(u[i] - exact);
        }
        t.rows.push_back(std::move(row));
    }
    t.notes.push_back("nodes = " + std::to_string(x.size()));
    if (s.exact) {
        const auto r = error_report(sol, s);
        t.notes.push_back("energy error = " + short_precision(r.energy_error) +
                          ", L2 error = " + short_precision(r.l2_error));
    }
    return t;
}

Table converge_table(const RunConfig& cfg)
{
    const auto table = convergence_study(scenario_family(cfg.scenario), cfg.h, cfg.eps0, {cfg.delta});
    Table t;
    for (const char* c : {"eps0", "h", "nodes", "energy_err", "l2_err", "rate"}) t.add_column(c);
    t.add_column("l2_rate", false);
    t.add_column("weighted_grad_err", false);
    t.add_column("reference", false);
    t.add_column("skipped", false);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : table.rows) {
        if (row.report) {
            const auto& r = *row.report;
            t.rows.push_back({row.eps0, row.h, as_int(r.node_count), r.energy_error, r.l2_error, row.rate,
                              row.l2_rate, r.weighted_grad_error,
                              std::string(r.reference_kind == ReferenceKind::ClosedForm ? "closed-form"
                                                                                        : "fine-mesh"),
                              std::string()});
        } else {
            t.rows.push_back({row.eps0, row.h, 0LL, nan, nan, nan, nan, nan, std::string(), row.skip_reason});
        }
    }
    return t;
}

Table interp_table(const RunConfig& cfg)
{
    const Scenario s = make_scenario(cfg.scenario, cfg.eps0.front());
    const auto table = interpolation_study(s, cfg.h, cfg.delta);
    struct Column {
        const char* name;
        double InterpolationRow::*member;
    };
    static constexpr Column kColumns[] = {
        {"smooth_l2", &InterpolationRow::smooth_l2},
        {"smooth_h1_semi", &InterpolationRow::smooth_h1_semi},
        {"layer_l2_coarse", &InterpolationRow::layer_l2_coarse},
        {"layer_max_coarse", &InterpolationRow::layer_max_coarse},
        {"layer_weighted_l2_fine", &InterpolationRow::layer_weighted_l2_fine},
        {"layer_weighted_grad_fine", &InterpolationRow::layer_weighted_grad_fine},
    };
    Table t;
    t.add_column("h");
    t.add_column("nodes");
    t.add_column("tau");
    for (const auto& c : kColumns) t.add_column(c.name);
    for (const auto& row : table.rows) {
        std::vector<Cell> cells{row.h, as_int(row.node_count), row.tau};
        for (const auto& c : kColumns) cells.emplace_back(row.*(c.member));
        t.rows.push_back(std::move(cells));
    }
    for (const auto& c : kColumns) {
        std::string line = std::string("rates ") + c.name + ":";
        for (double r : table.rates(c.member)) line += " " + short_precision(r);
        t.notes.push_back(line);
    }
    return t;
}

Suite parse_suite(const std::string& name)
{
    if (name == "lemmas") return Suite::Lemmas;
    if (name == "barriers") return Suite::Barriers;
    if (name == "bounds") return Suite::Bounds;
    return Suite::All;
}

Table verify_table(const RunConfig& cfg, bool& all_passed)
{
    const auto reports = run_verification_suite(parse_suite(cfg.suite), cfg.seed);
    Table t;
    t.add_column("name");
    t.add_column("worst_margin");
    t.add_column("worst_point");
    t.add_column("status");
    t.add_column("measured", false);
    t.add_column("tolerance", false);
    t.add_column("samples", false);
    all_passed = true;
    for (const auto& r : reports) {
        all_passed = all_passed && r.passed;
        t.rows.push_back({r.name, r.worst_margin, r.worst_point, std::string(r.passed ? "PASS" : "FAIL"),
                          r.measured, r.tolerance, as_int(r.sample_count)});
    }
    return t;
}

void write_pretty_verify(const Table& t, std::ostream& out)
{
    for (const auto& row : t.rows) {
        out << std::get<std::string>(row[3]) << "  " << std::get<std::string>(row[0])
            << "  worst_margin=" << short_precision(std::get<double>(row[1]))
            << "  worst_point=" << short_precision(std::get<double>(row[2])) << '\n';
    }
}

double parse_one(std::string_view token)
{
    auto trim = [](std::string_view s) {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        return s;
    };
    auto number = [](std::string_view s) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
            throw std::invalid_argument("not a number: '" + std::string(s) + "'");
        }
        return v;
    };
    token = trim(token);
    const auto slash = token.find('/');
    if (slash == std::string_view::npos) return number(token);
    const double den = number(trim(token.substr(slash + 1)));
    if (den == 0.0) throw std::invalid_argument("zero denominator in '" + std::string(token) + "'");
    return number(trim(token.substr(0, slash))) / den;
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_one(text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        Table table;
        bool verified = true;
        if (cfg.subcommand == "mesh") {
            table = mesh_table(cfg);
        } else if (cfg.subcommand == "solve") {
            table = solve_table(cfg);
        } else if (cfg.subcommand == "converge") {
            table = converge_table(cfg);
        } else if (cfg.subcommand == "interp") {
            table = interp_table(cfg);
        } else if (cfg.subcommand == "verify") {
            table = verify_table(cfg, verified);
        } else {
            err << "unknown subcommand '" << cfg.subcommand << "'\n";
            return kExitUsage;
        }

        std::ofstream file;
        std::ostream* sink = &out;
        if (cfg.output_path) {
            file.open(*cfg.output_path, std::ios::binary);
            if (!file) {
                err << "cannot open '" << *cfg.output_path << "' for writing\n";
                return kExitFailure;
            }
            sink = &file;
        }
        if (cfg.subcommand == "verify" && cfg.format == Format::Pretty) {
            write_pretty_verify(table, *sink);
        } else {
            write_table(table, cfg, *sink);
        }
        sink->flush();
        if (!verified) {
            err << "verification failed\n";
            return kExitFailure;
        }
        return kExitOk;
    } catch (const Error& e) {
        err << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::DegenerateRegime: return kExitDegenerate;
        case ErrorKind::Parameter: return kExitUsage;
        default: return kExitFailure;
        }
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Layer-adapted finite elements for convection-diffusion problems with variable diffusion",
                 "cdlayer"};
    app.set_help_flag("--help", "print this help message and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    RunConfig cfg;
    std::string eps_text = "1e-6";
    std::string h_text = "1/64";
    std::string format_text = "csv";
    std::string output_text;
    const auto& names = scenario_names();

    auto add_io = [&](CLI::App* sub) {
        sub->add_option("--format", format_text, "csv, json or pretty")
            ->check(CLI::IsMember({"csv", "json", "pretty"}));
        sub->add_option("--output", output_text, "write to this file instead of stdout");
        sub->add_option("--seed", cfg.seed, "seed for randomized suites");
    };
    auto add_problem = [&](CLI::App* sub, const char* h_help) {
        sub->add_option("--scenario", cfg.scenario, "built-in scenario")->check(CLI::IsMember(names));
        sub->add_option("--eps0", eps_text, "diffusion scale (list for converge)");
        sub->add_option("--h", h_text, h_help);
        sub->add_option("--delta", cfg.delta, "first-step factor, x_1 = h delta eps_lower");
        add_io(sub);
    };

    auto* mesh = app.add_subcommand("mesh", "print the layer-adapted mesh");
    add_problem(mesh, "mesh parameter");
    auto* solve = app.add_subcommand("solve", "Galerkin solution at the mesh nodes");
    add_problem(solve, "mesh parameter");
    solve->add_flag("--exact", cfg.exact, "add exact values and nodal errors");
    auto* converge = app.add_subcommand("converge", "convergence sweep over eps0 and h");
    add_problem(converge, "list of mesh parameters, e.g. 1/8,1/16");
    auto* interp = app.add_subcommand("interp", "interpolation error study");
    add_problem(interp, "list of mesh parameters");
    auto* verify = app.add_subcommand("verify", "numerical checks of the a priori estimates");
    verify->add_option("--suite", cfg.suite, "lemmas, barriers, bounds or all")
        ->check(CLI::IsMember({"lemmas", "barriers", "bounds", "all"}));
    add_io(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.format = format_text == "json" ? Format::Json : format_text == "pretty" ? Format::Pretty : Format::Csv;
    if (!output_text.empty()) cfg.output_path = output_text;
    try {
        cfg.eps0 = parse_real_list(eps_text);
        cfg.h = parse_real_list(h_text);
    } catch (const std::invalid_argument& e) {
        err << "invalid number list: " << e.what() << '\n';
        return kExitUsage;
    }
    auto usage = [&](const std::string& msg) {
        err << msg << '\n';
        return kExitUsage;
    };
    for (double v : cfg.eps0) {
        if (!(v > 0.0 && v <= 0.1)) return usage("--eps0 values must lie in (0, 0.1]");
    }
    for (double v : cfg.h) {
        if (!(v > 0.0 && v < 1.0)) return usage("--h values must lie in (0, 1)");
    }
    if (!(cfg.delta > 0.0)) return usage("--delta must be positive");
    const bool single = cfg.subcommand == "mesh" || cfg.subcommand == "solve";
    if (single && cfg.h.size() != 1) return usage("--h takes a single value for " + cfg.subcommand);
    if (cfg.subcommand != "converge" && cfg.eps0.size() != 1) {
        return usage("--eps0 takes a single value for " + cfg.subcommand);
    }
    return run(cfg, out, err);
}

}  // namespace cdlayer::cli
