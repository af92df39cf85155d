#include "nevac/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <sstream>

#include "nevac/fermionize.hpp"
#include "nevac/hardy.hpp"
#include "nevac/oracle.hpp"

namespace nevac {

namespace {

using Clock = std::chrono::steady_clock;

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("invalid value '" + value + "' for " + key);
  }
  return out;
}

double parse_positive(const std::string& key, const std::string& value) {
  const double v = parse_number<double>(key, value);
  if (!(v > 0.0)) throw ConfigError(key + " must be positive");
  return v;
}

double parse_non_negative(const std::string& key, const std::string& value) {
  const double v = parse_number<double>(key, value);
  if (!(v >= 0.0)) throw ConfigError(key + " must be non-negative");
  return v;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

std::string join(const std::vector<long>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;
using Getter = std::function<std::string(const PipelineConfig&)>;

struct Key {
  std::string name;
  Setter set;
  Getter get;
};

const std::vector<Key>& key_table() {
  static const std::vector<Key> table = {
      {"beta",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "auto") {
           c.beta.reset();
           return;
         }
         parse_positive("beta", v);
         c.beta = v;
       },
       [](const PipelineConfig& c) { return c.beta.value_or("auto"); }},
      {"statistics",
       [](PipelineConfig& c, const std::string& v) {
         if (v != "auto" && v != "bosonic" && v != "fermionic" && v != "tau") {
           throw ConfigError("statistics must be auto, bosonic, fermionic or tau");
         }
         c.statistics = v;
       },
       [](const PipelineConfig& c) { return c.statistics; }},
      {"precision_bits",
       [](PipelineConfig& c, const std::string& v) {
         const long bits = parse_number<long>("precision_bits", v);
         if (bits < 53 || bits > 65536) throw ConfigError("precision_bits must lie in [53, 65536]");
         c.precision_bits = bits;
       },
       [](const PipelineConfig& c) { return std::to_string(c.precision_bits); }},
      {"eta", [](PipelineConfig& c, const std::string& v) { c.eta = parse_positive("eta", v); },
       [](const PipelineConfig& c) { return format_double(c.eta); }},
      {"omega_min", [](PipelineConfig& c, const std::string& v) { c.omega_min = parse_number<double>("omega_min", v); },
       [](const PipelineConfig& c) { return format_double(c.omega_min); }},
      {"omega_max", [](PipelineConfig& c, const std::string& v) { c.omega_max = parse_number<double>("omega_max", v); },
       [](const PipelineConfig& c) { return format_double(c.omega_max); }},
      {"omega_count",
       [](PipelineConfig& c, const std::string& v) { c.omega_count = parse_number<std::size_t>("omega_count", v); },
       [](const PipelineConfig& c) { return std::to_string(c.omega_count); }},
      {"lambda", [](PipelineConfig& c, const std::string& v) { c.lambda = parse_non_negative("lambda", v); },
       [](const PipelineConfig& c) { return format_double(c.lambda); }},
      {"hardy_order",
       [](PipelineConfig& c, const std::string& v) {
         c.hardy_order = parse_number<int>("hardy_order", v);
         if (c.hardy_order < 1) throw ConfigError("hardy_order must be at least 1");
       },
       [](const PipelineConfig& c) { return std::to_string(c.hardy_order); }},
      {"max_iterations",
       [](PipelineConfig& c, const std::string& v) { c.max_iterations = parse_number<std::size_t>("max_iterations", v); },
       [](const PipelineConfig& c) { return std::to_string(c.max_iterations); }},
      {"gradient_tolerance",
       [](PipelineConfig& c, const std::string& v) { c.gradient_tolerance = parse_positive("gradient_tolerance", v); },
       [](const PipelineConfig& c) { return format_double(c.gradient_tolerance); }},
      {"pick_shift", [](PipelineConfig& c, const std::string& v) { c.pick_shift = parse_non_negative("pick_shift", v); },
       [](const PipelineConfig& c) { return format_double(c.pick_shift); }},
      {"target_indices",
       [](PipelineConfig& c, const std::string& v) {
         c.target_indices.clear();
         if (v == "default") return;
         std::stringstream in(v);
         std::string item;
         while (std::getline(in, item, ',')) c.target_indices.push_back(parse_number<long>("target_indices", trim(item)));
         if (c.target_indices.empty()) throw ConfigError("target_indices is empty");
       },
       [](const PipelineConfig& c) { return c.target_indices.empty() ? "default" : join(c.target_indices); }},
      {"fit_omega_min",
       [](PipelineConfig& c, const std::string& v) { c.fit_omega_min = parse_number<double>("fit_omega_min", v); },
       [](const PipelineConfig& c) { return format_double(c.fit_omega_min); }},
      {"fit_omega_max",
       [](PipelineConfig& c, const std::string& v) { c.fit_omega_max = parse_number<double>("fit_omega_max", v); },
       [](const PipelineConfig& c) { return format_double(c.fit_omega_max); }},
      {"fit_count", [](PipelineConfig& c, const std::string& v) { c.fit_count = parse_number<std::size_t>("fit_count", v); },
       [](const PipelineConfig& c) { return std::to_string(c.fit_count); }},
      {"tikhonov_alpha",
       [](PipelineConfig& c, const std::string& v) { c.tikhonov_alpha = parse_non_negative("tikhonov_alpha", v); },
       [](const PipelineConfig& c) { return format_double(c.tikhonov_alpha); }},
      {"svd_cutoff_rel",
       [](PipelineConfig& c, const std::string& v) { c.svd_cutoff_rel = parse_non_negative("svd_cutoff_rel", v); },
       [](const PipelineConfig& c) { return format_double(c.svd_cutoff_rel); }},
      {"sum_rule",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "auto") {
           c.sum_rule.reset();
           return;
         }
         c.sum_rule = parse_positive("sum_rule", v);
       },
       [](const PipelineConfig& c) { return c.sum_rule ? format_double(*c.sum_rule) : std::string("auto"); }},
      {"seed", [](PipelineConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); },
       [](const PipelineConfig& c) { return std::to_string(c.seed); }},
      {"bench_beta", [](PipelineConfig& c, const std::string& v) { c.bench_beta = parse_positive("bench_beta", v); },
       [](const PipelineConfig& c) { return format_double(c.bench_beta); }},
      {"bench_center", [](PipelineConfig& c, const std::string& v) { c.bench_center = parse_positive("bench_center", v); },
       [](const PipelineConfig& c) { return format_double(c.bench_center); }},
      {"bench_width", [](PipelineConfig& c, const std::string& v) { c.bench_width = parse_positive("bench_width", v); },
       [](const PipelineConfig& c) { return format_double(c.bench_width); }},
      {"bench_count",
       [](PipelineConfig& c, const std::string& v) { c.bench_count = parse_number<std::size_t>("bench_count", v); },
       [](const PipelineConfig& c) { return std::to_string(c.bench_count); }},
  };
  return table;
}

RealFrequencyGrid output_grid(const PipelineConfig& cfg) {
  try {
    return RealFrequencyGrid(cfg.omega_min, cfg.omega_max, cfg.omega_count);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("output grid: ") + e.what());
  }
}

FermionizeConfig fermionize_config(const PipelineConfig& cfg) {
  FermionizeConfig f;
  if (!cfg.target_indices.empty()) f.target_indices = cfg.target_indices;
  try {
    f.fit_grid = RealFrequencyGrid(cfg.fit_omega_min, cfg.fit_omega_max, cfg.fit_count);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("fit grid: ") + e.what());
  }
  f.tikhonov_alpha = cfg.tikhonov_alpha;
  f.svd_cutoff_rel = cfg.svd_cutoff_rel;
  f.precision_bits = cfg.precision_bits;
  try {
    f.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return f;
}

std::string kind_of(const DataSet& data) {
  if (std::holds_alternative<ImaginaryTimeData>(data)) return "tau";
  return to_string(std::get<MatsubaraData>(data).statistics);
}

// Fermionic data handed to the Nevanlinna stage, with everything needed to
// map the result back.
struct Prepared {
  MatsubaraData fermionic;
  SumRule sum_rule;
  bool bosonic_output = false;
  double beta = 0.0;
  std::string beta_text;
};

DataFile load_input(const PipelineConfig& cfg, const std::string& path, PipelineReport& report) {
  DataFile file = parse_data_file(path, cfg.precision_bits);
  report.input_kind = kind_of(file.data);
  if (cfg.statistics != "auto" && cfg.statistics != report.input_kind) {
    throw ConfigError("statistics=" + cfg.statistics + " but the file declares " + report.input_kind);
  }
  if (cfg.beta) {
    const Real want = Real::parse(*cfg.beta, cfg.precision_bits);
    const Real have = Real::parse(file.beta_text, cfg.precision_bits);
    if (!(want == have)) throw ConfigError("beta=" + *cfg.beta + " but the file declares beta=" + file.beta_text);
  }
  if (const auto* m = std::get_if<MatsubaraData>(&file.data)) {
    const auto problems = validate(*m);
    if (!problems.empty()) throw ParseError(problems.front());
  } else {
    const auto problems = validate(std::get<ImaginaryTimeData>(file.data));
    if (!problems.empty()) throw ParseError(problems.front());
  }
  return file;
}

Prepared prepare(const PipelineConfig& cfg, const DataFile& file, PipelineReport& report) {
  Prepared p;
  p.beta_text = file.beta_text;
  const FermionizeConfig fcfg = fermionize_config(cfg);
  if (const auto* tau = std::get_if<ImaginaryTimeData>(&file.data)) {
    p.beta = tau->beta;
    p.bosonic_output = true;
    p.fermionic = fermionize_tau(*tau, fcfg);
    p.fermionic.beta = Real::parse(file.beta_text, cfg.precision_bits);
    if (!cfg.sum_rule) {
      try {
        p.sum_rule = sum_rule_from_tau(*tau);
      } catch (const PreconditionError& e) {
        report.extra.push_back(std::string("tau endpoints unusable for the sum rule (") + e.what() +
                               "); using the tail fit");
        p.sum_rule = sum_rule_from_tail(p.fermionic);
      }
    }
  } else {
    const auto& m = std::get<MatsubaraData>(file.data);
    p.beta = m.beta_double();
    if (m.statistics == Statistics::Bosonic) {
      p.bosonic_output = true;
      p.fermionic = fermionize_freq(m, fcfg).fermionic;
    } else {
      p.fermionic.beta = m.beta;
      p.fermionic.statistics = Statistics::Fermionic;
      p.fermionic.precision_bits = m.precision_bits;
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (m.indices[k] < 0) continue;  // mirror images of the positive half
        p.fermionic.indices.push_back(m.indices[k]);
        p.fermionic.values.push_back(m.values[k]);
      }
      if (p.fermionic.indices.empty()) throw ParseError("no non-negative fermionic indices in the input");
    }
    if (!cfg.sum_rule) p.sum_rule = sum_rule_from_tail(p.fermionic);
  }
  if (cfg.sum_rule) p.sum_rule = SumRule{*cfg.sum_rule, SumRuleSource::UserSupplied, 0.0};
  report.sum_rule = p.sum_rule;
  return p;
}

// Pick screening followed by the Schur recursion. A node the recursion
// rejects is dropped and the recursion restarted.
std::optional<SchurState> screen(const PipelineConfig& cfg, const MatsubaraData& fermionic, PipelineReport& report) {
  const SchurState full = disk_values(fermionic);
  const PickReport pick = pick_select(full, cfg.pick_shift);
  report.nodes_total = full.size();
  report.dropped = pick.dropped;
  report.min_pivot = pick.min_eigen_estimate;
  std::vector<std::size_t> kept = pick.selected;
  for (;;) {
    if (kept.empty()) {
      report.selected_indices.clear();
      report.exit_code = kExitNoCausalNodes;
      report.message = "no node passed the causality screening";
      return std::nullopt;
    }
    try {
      SchurState state = schur_coefficients(full.subset(kept));
      report.selected_indices = state.indices;
      return state;
    } catch (const CausalityError& e) {
      report.dropped.push_back({full.indices[kept[e.node()]], "rejected by the Schur recursion"});
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(e.node()));
    }
  }
}

struct Continuation {
  SchurState state;
  SpectralFunction aux;
  SpectralFunction output;
};

std::optional<Continuation> continue_prepared(const PipelineConfig& cfg, const Prepared& p, PipelineReport& report) {
  const RealFrequencyGrid grid = output_grid(cfg);
  auto state = screen(cfg, p.fermionic, report);
  if (!state) return std::nullopt;

  CostConfig cost_cfg{cfg.lambda, p.sum_rule, grid, cfg.eta};
  const HardyProblem problem(*state, cost_cfg, cfg.hardy_order);
  const HardyCoefficients init = HardyCoefficients::zeros(cfg.hardy_order);
  LbfgsOptions opts;
  opts.max_iterations = cfg.max_iterations;
  opts.gradient_tolerance = cfg.gradient_tolerance;
  const OptimizeResult opt = optimize(problem, init, opts);
  report.initial_cost = opt.trace.front().cost;
  report.final_cost = opt.cost;
  report.iterations = opt.trace.back().iteration;
  report.status = opt.status;

  SpectralFunction aux = extract_spectral(*state, hardy_free_function(opt.coeffs), EvaluationConfig{cfg.eta, grid});
  SpectralFunction out = p.bosonic_output ? tanh_convert(aux, p.beta) : aux;
  if (!opt.converged()) {
    report.exit_code = kExitNotConverged;
    report.message = "optimizer stopped at the iteration limit; output flagged";
  }
  return Continuation{std::move(*state), std::move(aux), std::move(out)};
}

std::string dropped_text(const std::vector<DroppedNode>& dropped) {
  std::string out;
  for (const auto& d : dropped) {
    if (!out.empty()) out += "; ";
    out += std::to_string(d.index) + ":" + d.reason;
  }
  return out.empty() ? "none" : out;
}

Metadata result_metadata(const PipelineConfig& cfg, const Prepared& p, const PipelineReport& report,
                         const SpectralFunction& out) {
  Metadata md = cfg.settings();
  md.emplace_back("input_kind", report.input_kind);
  md.emplace_back("input_beta", p.beta_text);
  md.emplace_back("sum_rule_used", format_double(p.sum_rule.value));
  md.emplace_back("sum_rule_source", to_string(p.sum_rule.source));
  md.emplace_back("sum_rule_quality", format_double(p.sum_rule.quality));
  md.emplace_back("nodes_total", std::to_string(report.nodes_total));
  md.emplace_back("nodes_selected", std::to_string(report.selected_indices.size()));
  md.emplace_back("selected_indices", join(report.selected_indices));
  md.emplace_back("dropped", dropped_text(report.dropped));
  md.emplace_back("initial_cost", format_double(report.initial_cost));
  md.emplace_back("final_cost", format_double(report.final_cost));
  md.emplace_back("iterations", std::to_string(report.iterations));
  md.emplace_back("optimizer_status", report.status ? to_string(*report.status) : "none");
  md.emplace_back("converged", report.exit_code == kExitNotConverged ? "no" : "yes");
  md.emplace_back("output_statistics", to_string(out.statistics));
  return md;
}

// Runs `body` with the common error mapping and timing.
PipelineReport guarded(const std::function<void(PipelineReport&)>& body) {
  PipelineReport report;
  const auto start = Clock::now();
  try {
    body(report);
  } catch (const ParseError& e) {
    report.exit_code = kExitParseError;
    report.message = e.what();
  } catch (const std::exception& e) {
    report.exit_code = kExitFailure;
    report.message = e.what();
  }
  report.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

std::string metric_row(const std::string& name, const Metrics& m, double norm) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-22s %12.4e %12.4e %12.4e %12.4e %12.4e", name.c_str(), m.l2, m.l2 / norm, m.linf,
                m.sum_rule_violation, m.peak_position_error);
  return buf;
}

}  // namespace

PipelineConfig PipelineConfig::from_environment() {
  PipelineConfig cfg;
  try {
    cfg.precision_bits = precision_from_environment();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  for (const auto& k : key_table()) {
    if (k.name == key) {
      k.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

void PipelineConfig::load_text(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_no);
    }
  }
}

void PipelineConfig::load_file(const std::string& path) { load_text(read_file(path)); }

Metadata PipelineConfig::settings() const {
  Metadata md;
  for (const auto& k : key_table()) md.emplace_back(k.name, k.get(*this));
  return md;
}

std::string format_report(const PipelineReport& r) {
  std::ostringstream out;
  if (!r.input_kind.empty()) out << "input: " << r.input_kind << '\n';
  if (r.nodes_total > 0) {
    out << "nodes: " << r.selected_indices.size() << " selected of " << r.nodes_total
        << " (smallest Cholesky pivot " << r.min_pivot << ")\n";
    for (const auto& d : r.dropped) out << "  dropped n=" << d.index << ": " << d.reason << '\n';
  }
  if (r.sum_rule) {
    out << "sum rule: S=" << r.sum_rule->value << " (" << to_string(r.sum_rule->source) << ", quality "
        << r.sum_rule->quality << ")\n";
  }
  if (r.status) {
    out << "cost: " << r.initial_cost << " -> " << r.final_cost << " in " << r.iterations << " iterations ("
        << to_string(*r.status) << ")\n";
  }
  for (const auto& line : r.extra) out << line << '\n';
  out << "time: " << r.seconds << " s\n";
  out << "exit: " << r.exit_code;
  if (!r.message.empty()) out << " (" << r.message << ")";
  out << '\n';
  return out.str();
}

PipelineReport run_pipeline(const PipelineConfig& cfg, const std::string& input, const std::string& output) {
  return guarded([&](PipelineReport& report) {
    const DataFile file = load_input(cfg, input, report);
    const Prepared p = prepare(cfg, file, report);
    const auto result = continue_prepared(cfg, p, report);
    if (!result) return;
    emit_spectral(output, result->output, result_metadata(cfg, p, report, result->output));
  });
}

PipelineReport run_fermionize(const PipelineConfig& cfg, const std::string& input, const std::string& output) {
  return guarded([&](PipelineReport& report) {
    const DataFile file = load_input(cfg, input, report);
    const Prepared p = prepare(cfg, file, report);
    Metadata md = cfg.settings();
    md.emplace_back("input_kind", report.input_kind);
    md.emplace_back("sum_rule_used", format_double(p.sum_rule.value));
    md.emplace_back("sum_rule_source", to_string(p.sum_rule.source));
    md.emplace_back("sum_rule_quality", format_double(p.sum_rule.quality));
    write_matsubara(output, p.fermionic, p.beta_text, md);
  });
}

PipelineReport run_check(const PipelineConfig& cfg, const std::string& input, const std::string& output) {
  return guarded([&](PipelineReport& report) {
    const DataFile file = load_input(cfg, input, report);
    const Prepared p = prepare(cfg, file, report);
    screen(cfg, p.fermionic, report);
    std::ofstream out(output, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + output + " for writing");
    out << "# input_kind=" << report.input_kind << '\n';
    out << "# nodes_total=" << report.nodes_total << '\n';
    out << "# nodes_selected=" << report.selected_indices.size() << '\n';
    out << "# min_pivot=" << format_double(report.min_pivot) << '\n';
    out << "# sum_rule_used=" << format_double(p.sum_rule.value) << '\n';
    out << "# index status\n";
    for (long n : report.selected_indices) out << n << " selected\n";
    for (const auto& d : report.dropped) out << d.index << " dropped: " << d.reason << '\n';
    if (!out) throw std::runtime_error("write to " + output + " failed");
  });
}

PipelineReport run_bench(const PipelineConfig& cfg, const std::string& input, const std::string& output) {
  return guarded([&](PipelineReport& report) {
    const SpectralModel model = SpectralModel::symmetric_double_peak(cfg.bench_center, cfg.bench_width);
    const std::string beta_text = format_double(cfg.bench_beta);
    std::vector<long> indices(cfg.bench_count);
    for (std::size_t n = 0; n < indices.size(); ++n) indices[n] = static_cast<long>(n);
    OracleOptions oracle;
    oracle.precision_bits = cfg.precision_bits;
    const MatsubaraData sampled = oracle_matsubara(model, Real::parse(beta_text, cfg.precision_bits), indices,
                                                   Statistics::Bosonic, oracle);
    write_matsubara(input, sampled, beta_text, {{"model", "symmetric double peak"},
                                                {"bench_center", format_double(cfg.bench_center)},
                                                {"bench_width", format_double(cfg.bench_width)}});

    const DataFile file = load_input(cfg, input, report);
    const Prepared p = prepare(cfg, file, report);
    const auto result = continue_prepared(cfg, p, report);
    if (!result) return;
    emit_spectral(output, result->output, result_metadata(cfg, p, report, result->output));

    const RealFrequencyGrid grid = output_grid(cfg);
    const SpectralFunction exact_aux = model_spectral(model, grid, p.beta, DensityKind::Aux);
    const SpectralFunction exact = model_spectral(model, grid, p.beta, DensityKind::Bosonic);
    const SpectralFunction baseline =
        extract_spectral(result->state, constant_free_function({0.0, 0.0}, cfg.precision_bits),
                         EvaluationConfig{cfg.eta, grid});
    char header[160];
    std::snprintf(header, sizeof header, "%-22s %12s %12s %12s %12s %12s", "metric", "l2", "l2/norm", "linf",
                  "sum rule", "peak shift");
    report.extra.emplace_back(header);
    report.extra.push_back(metric_row("aux theta=0", compare(exact_aux, baseline), l2_norm(exact_aux)));
    report.extra.push_back(metric_row("aux optimized", compare(exact_aux, result->aux), l2_norm(exact_aux)));
    report.extra.push_back(metric_row("bosonic optimized", compare(exact, result->output), l2_norm(exact)));
  });
}

}  // namespace nevac
