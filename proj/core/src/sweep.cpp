#include "lgi/sweep.hpp"

#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lgi/errors.hpp"

namespace lgi {

namespace {

std::string format_real(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string format_optional(const std::optional<double>& value) {
    return value ? format_real(*value) : std::string();
}

double parse_real(std::string_view text, std::string_view field) {
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("malformed number '" + std::string(text) + "' in column " +
                          std::string(field));
    }
    return value;
}

std::optional<double> parse_optional(std::string_view text, std::string_view field) {
    if (text.empty()) return std::nullopt;
    return parse_real(text, field);
}

// Rounded to the CSV's 12 significant digits so both exports carry the same values.
nlohmann::ordered_json json_real(const std::optional<double>& value) {
    if (!value) return nullptr;
    return parse_real(format_real(*value), "json");
}

void validate_range(const GridRange& range, std::string_view name) {
    if (range.count < 1 || !std::isfinite(range.lo) || !std::isfinite(range.hi) ||
        range.hi < range.lo) {
        throw ConfigError(std::string(name) + " grid needs count >= 1 and finite lo <= hi");
    }
}

std::string io_cause() { return std::strerror(errno); }

}  // namespace

std::string_view to_string(StateFamily family) {
    switch (family) {
        case StateFamily::PureAlpha: return "pure_alpha";
        case StateFamily::BlochMx: return "bloch_mx";
        case StateFamily::BlochMz: return "bloch_mz";
        case StateFamily::BlochGeneral: return "bloch_general";
    }
    return "pure_alpha";
}

StateFamily parse_state_family(std::string_view text) {
    if (text == "pure_alpha") return StateFamily::PureAlpha;
    if (text == "bloch_mx") return StateFamily::BlochMx;
    if (text == "bloch_mz") return StateFamily::BlochMz;
    if (text == "bloch_general") return StateFamily::BlochGeneral;
    throw ConfigError("unknown state family '" + std::string(text) +
                      "' (expected pure_alpha, bloch_mx, bloch_mz or bloch_general)");
}

std::vector<double> default_gammas(DephasingKind kind) {
    switch (kind) {
        case DephasingKind::None: return {0.0};
        case DephasingKind::ZBasis: return {0.1, 0.5, 1.0, 1.5};
        default: return {0.1, 0.5, 1.0};
    }
}

void SweepSpec::validate() const {
    validate_range(family_grid, "family");
    validate_range(delta_grid, "delta");
    search.validate();
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
        throw ConfigError("constraint tolerance must be finite and > 0");
    }
    if (gammas.empty()) {
        throw ConfigError("gamma list must not be empty");
    }
    for (double g : gammas) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw ConfigError("gamma values must be finite and >= 0");
        }
        if (model == DephasingKind::None && g != 0.0) {
            throw ConfigError("model 'none' only admits gamma = 0");
        }
    }
    if (model == DephasingKind::GeneralAxis) {
        const double n = std::hypot(axis[0], axis[1], axis[2]);
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw ConfigError("dephasing axis must be a finite non-zero vector");
        }
    }
    switch (family) {
        case StateFamily::PureAlpha:
            if (family_grid.lo < 0.0 || family_grid.hi > 1.0) {
                throw ConfigError("pure_alpha values must lie in [0, 1]");
            }
            break;
        case StateFamily::BlochMx:
        case StateFamily::BlochMz:
            if (family_grid.lo < -1.0 || family_grid.hi > 1.0) {
                throw ConfigError("Bloch components must lie in [-1, 1]");
            }
            break;
        case StateFamily::BlochGeneral: {
            if (vary_axis < 0 || vary_axis > 2) {
                throw ConfigError("bloch_general needs a varied axis x, y or z");
            }
            // |m|^2 is convex in the varied component, so the endpoints bound it.
            for (double v : {family_grid.lo, family_grid.hi}) {
                std::array<double, 3> m = {fixed.mx, fixed.my, fixed.mz};
                m[vary_axis] = v;
                if (std::hypot(m[0], m[1], m[2]) > 1.0 + kStateTolerance) {
                    throw ConfigError("bloch_general family leaves the Bloch ball at value " +
                                      format_real(v));
                }
            }
            break;
        }
    }
}

DensityMatrix SweepSpec::state_at(double value) const {
    switch (family) {
        case StateFamily::PureAlpha: return pure_state(value);
        case StateFamily::BlochMx: return mixed_state({value, 0.0, 0.0});
        case StateFamily::BlochMz: return mixed_state({0.0, 0.0, value});
        case StateFamily::BlochGeneral: {
            std::array<double, 3> m = {fixed.mx, fixed.my, fixed.mz};
            m[vary_axis] = value;
            return mixed_state({m[0], m[1], m[2]});
        }
    }
    return DensityMatrix();
}

DephasingModel SweepSpec::model_at(double gamma) const {
    return DephasingModel::make(model, gamma, axis);
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec, int jobs, const SweepLog& log) {
    spec.validate();
    const std::vector<double> family_values = spec.family_grid.values();
    const std::vector<double> deltas = spec.delta_grid.values();
    const std::size_t nf = family_values.size();
    const std::size_t nd = deltas.size();
    const std::size_t ng = spec.gammas.size();
    const std::string family_name(to_string(spec.family));

    std::vector<SweepCell> cells(nf * nd * ng);
    const std::size_t units = nf * ng;
    std::atomic<std::size_t> next{0};
    std::vector<std::size_t> remaining(ng, nf);
    std::mutex mutex;
    std::exception_ptr failure;

    const auto work = [&] {
        for (std::size_t u = next++; u < units; u = next++) {
            const std::size_t f = u / ng;
            const std::size_t g = u % ng;
            try {
                const DephasingModel model = spec.model_at(spec.gammas[g]);
                const CanonicalProblem problem(spec.state_at(family_values[f]), model,
                                               spec.search);
                for (std::size_t d = 0; d < nd; ++d) {
                    const OptimizationResult r = problem.optimize({deltas[d], spec.tolerance});
                    SweepCell& cell = cells[(f * nd + d) * ng + g];
                    cell.family = family_name;
                    cell.family_value = family_values[f];
                    cell.delta_over_J = deltas[d];
                    cell.gamma = spec.gammas[g];
                    cell.model = model.label();
                    cell.feasible = r.feasible;
                    cell.k3_opt = r.k3_opt;
                    if (r.argmax) {
                        cell.theta_star = r.argmax->theta;
                        cell.phi_star = r.argmax->phi;
                        cell.dt_star = r.argmax->dt;
                    }
                    cell.residual = r.constraint_residual;
                }
            } catch (...) {
                const std::lock_guard lock(mutex);
                if (!failure) failure = std::current_exception();
                next = units;
                return;
            }
            const std::lock_guard lock(mutex);
            if (--remaining[g] == 0 && log) {
                log("gamma " + format_real(spec.gammas[g]) + ": " + std::to_string(nf * nd) +
                    " cells done");
            }
        }
    };

    if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), units);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return cells;
}

std::string resolution_comment(const SweepSpec& spec) {
    std::ostringstream os;
    os << "grid family=" << spec.family_grid.count << " delta=" << spec.delta_grid.count
       << " gammas=" << spec.gammas.size() << " search=" << spec.search.theta_points << 'x'
       << spec.search.phi_points << 'x' << spec.search.dt_points
       << " dt_max=" << format_real(spec.search.dt_max);
    return os.str();
}

std::string to_csv(const std::vector<SweepCell>& cells, const std::string& comment) {
    std::string out;
    if (!comment.empty()) out += "# " + comment + "\n";
    out += kCsvHeader;
    out += '\n';
    for (const SweepCell& c : cells) {
        out += c.family + ',' + format_real(c.family_value) + ',' + format_real(c.delta_over_J) +
               ',' + format_real(c.gamma) + ',' + c.model + ',' + format_optional(c.k3_opt) +
               ',' + (c.feasible ? "true" : "false") + ',' + format_optional(c.theta_star) + ',' +
               format_optional(c.phi_star) + ',' + format_optional(c.dt_star) + ',' +
               format_real(c.residual) + '\n';
    }
    return out;
}

std::string to_json(const std::vector<SweepCell>& cells) {
    nlohmann::ordered_json array = nlohmann::ordered_json::array();
    for (const SweepCell& c : cells) {
        array.push_back({{"family", c.family},
                         {"family_value", json_real(c.family_value)},
                         {"delta_over_J", json_real(c.delta_over_J)},
                         {"gamma", json_real(c.gamma)},
                         {"model", c.model},
                         {"k3_opt", json_real(c.k3_opt)},
                         {"feasible", c.feasible},
                         {"theta_star", json_real(c.theta_star)},
                         {"phi_star", json_real(c.phi_star)},
                         {"dt_star", json_real(c.dt_star)},
                         {"residual", json_real(c.residual)}});
    }
    return array.dump(2) + "\n";
}

std::vector<SweepCell> parse_csv(std::string_view text) {
    std::vector<SweepCell> cells;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view() : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kCsvHeader) {
                throw ConfigError("unexpected CSV header on line " + std::to_string(line_no));
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        for (std::size_t start = 0;;) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 11) {
            throw ConfigError("CSV line " + std::to_string(line_no) + " has " +
                              std::to_string(fields.size()) + " fields, expected 11");
        }
        if (fields[6] != "true" && fields[6] != "false") {
            throw ConfigError("CSV line " + std::to_string(line_no) + ": feasible must be true/false");
        }
        SweepCell c;
        c.family = std::string(fields[0]);
        c.family_value = parse_real(fields[1], "family_value");
        c.delta_over_J = parse_real(fields[2], "delta_over_J");
        c.gamma = parse_real(fields[3], "gamma");
        c.model = std::string(fields[4]);
        c.k3_opt = parse_optional(fields[5], "k3_opt");
        c.feasible = fields[6] == "true";
        c.theta_star = parse_optional(fields[7], "theta_star");
        c.phi_star = parse_optional(fields[8], "phi_star");
        c.dt_star = parse_optional(fields[9], "dt_star");
        c.residual = parse_real(fields[10], "residual");
        cells.push_back(std::move(c));
    }
    if (!header_seen) {
        throw ConfigError("CSV has no header line");
    }
    return cells;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing: " + io_cause());
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("write to '" + path + "' failed: " + io_cause());
    }
}

}  // namespace

void export_csv(const std::vector<SweepCell>& cells, const std::string& path,
                const std::string& comment) {
    write_file(path, to_csv(cells, comment));
}

void export_json(const std::vector<SweepCell>& cells, const std::string& path) {
    write_file(path, to_json(cells));
}

std::vector<SweepCell> import_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading: " + io_cause());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str());
}

}  // namespace lgi
