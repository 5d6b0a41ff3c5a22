#include "rampsim/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "rampsim/bridge_model.hpp"
#include "rampsim/csv.hpp"
#include "rampsim/param_estimation.hpp"
#include "rampsim/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rampsim {

namespace {

void log(const std::string& message) { std::cerr << "[rampsim] " << message << '\n'; }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : csv::split(text))
    if (!field.empty()) out.push_back(csv::to_double(field));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

void RunConfig::validate() const {
  turbine.validate();
  battery.validate();
  fees.validate();
  if (input_path.empty()) synthetic.validate();
  if (limits.empty()) throw InputError("at least one ramp limit is required");
  for (double f : limits)
    if (!(f > 0.0 && f <= 1.0)) throw InputError("ramp limits must be fractions in (0, 1]");
  if (paths < 2) throw InputError("simulation needs at least two paths");
  if (horizon < 1) throw InputError("horizon must be at least 1");
  if (initial_law != "empirical" && initial_law != "fixed")
    throw InputError("initial_law must be 'empirical' or 'fixed'");
  if (min_sample < 1) throw InputError("min_sample must be at least 1");
}

std::string RunConfig::canonical() const {
  std::ostringstream out;
  auto put = [&](const char* key, const std::string& value) { out << key << '=' << value << '\n'; };
  auto num = [](double v) { return csv::format_double(v); };
  put("input.path", input_path);
  if (input_path.empty()) {
    put("synthetic.hours", std::to_string(synthetic.n_steps));
    put("synthetic.shape", num(synthetic.shape));
    put("synthetic.scale", num(synthetic.scale));
    put("synthetic.autocorrelation", num(synthetic.autocorrelation));
    put("synthetic.seed", std::to_string(synthetic.seed));
  }
  put("turbine.cut_in_speed", num(turbine.cut_in_speed));
  put("turbine.cut_out_speed", num(turbine.cut_out_speed));
  put("turbine.rated_speed", num(turbine.rated_speed));
  put("turbine.rated_capacity", num(turbine.rated_capacity));
  std::string limits_text;
  for (double f : limits) limits_text += (limits_text.empty() ? "" : ",") + num(f);
  put("ramp.limits", limits_text);
  put("battery.min_soc", num(battery.min_soc));
  put("battery.max_soc", num(battery.max_soc));
  put("battery.initial_soc", num(battery.initial_soc));
  put("penalty.up_fee", num(fees.up_fee));
  put("penalty.down_fee", num(fees.down_fee));
  put("penalty.discount_rate", num(fees.discount_rate));
  put("simulation.horizon", std::to_string(horizon));
  put("simulation.paths", std::to_string(paths));
  put("simulation.seed", std::to_string(seed));
  put("simulation.initial_law", initial_law);
  put("simulation.min_sample", std::to_string(min_sample));
  put("simulation.eligibility", std::to_string(eligibility));
  put("simulation.sign_tolerance", num(sign_tolerance));
  put("simulation.dump_paths", std::to_string(dump_paths));
  return out.str();
}

std::string RunConfig::hash() const {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buffer;
}

RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }

  static const std::map<std::string, std::set<std::string>> known{
      {"input", {"path"}},
      {"synthetic", {"hours", "shape", "scale", "autocorrelation", "seed"}},
      {"turbine", {"cut_in_speed", "cut_out_speed", "rated_speed", "rated_capacity"}},
      {"ramp", {"limits"}},
      {"battery", {"min_soc", "max_soc", "initial_soc"}},
      {"penalty", {"up_fee", "down_fee", "discount_rate"}},
      {"simulation",
       {"horizon", "paths", "seed", "initial_law", "min_sample", "eligibility", "sign_tolerance", "dump_paths",
        "threads"}},
      {"output", {"dir"}}};
  for (const auto& [section, body] : tree) {
    auto it = known.find(section);
    if (it == known.end()) throw InputError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw InputError("config: unknown key '" + key + "' in [" + section + "]");
  }

  RunConfig cfg;
  auto str = [&](const char* path) { return tree.get_optional<std::string>(path); };
  auto number = [&](const char* path, double& target) {
    if (auto v = str(path)) target = csv::to_double(*v);
  };
  auto integer = [&](const char* path, auto& target) {
    if (auto v = str(path)) {
      const long long parsed = csv::to_integer(*v);
      if (parsed < 0) throw InputError(std::string("config: ") + path + " must be non-negative");
      target = static_cast<std::remove_reference_t<decltype(target)>>(parsed);
    }
  };
  try {
    if (auto v = str("input.path")) cfg.input_path = *v;
    integer("synthetic.hours", cfg.synthetic.n_steps);
    number("synthetic.shape", cfg.synthetic.shape);
    number("synthetic.scale", cfg.synthetic.scale);
    number("synthetic.autocorrelation", cfg.synthetic.autocorrelation);
    integer("synthetic.seed", cfg.synthetic.seed);
    number("turbine.cut_in_speed", cfg.turbine.cut_in_speed);
    number("turbine.cut_out_speed", cfg.turbine.cut_out_speed);
    number("turbine.rated_speed", cfg.turbine.rated_speed);
    number("turbine.rated_capacity", cfg.turbine.rated_capacity);
    if (auto v = str("ramp.limits")) cfg.limits = parse_list(*v);
    number("battery.min_soc", cfg.battery.min_soc);
    number("battery.max_soc", cfg.battery.max_soc);
    cfg.battery.initial_soc = 0.5 * (cfg.battery.min_soc + cfg.battery.max_soc);
    number("battery.initial_soc", cfg.battery.initial_soc);
    number("penalty.up_fee", cfg.fees.up_fee);
    number("penalty.down_fee", cfg.fees.down_fee);
    number("penalty.discount_rate", cfg.fees.discount_rate);
    integer("simulation.horizon", cfg.horizon);
    integer("simulation.paths", cfg.paths);
    integer("simulation.seed", cfg.seed);
    if (auto v = str("simulation.initial_law")) cfg.initial_law = *v;
    integer("simulation.min_sample", cfg.min_sample);
    integer("simulation.eligibility", cfg.eligibility);
    number("simulation.sign_tolerance", cfg.sign_tolerance);
    integer("simulation.dump_paths", cfg.dump_paths);
    integer("simulation.threads", cfg.threads);
    if (auto v = str("output.dir")) cfg.output_dir = *v;
  } catch (const InputError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  auto cfg = parse_config(text.str());
  // Relative input paths resolve against the config file's directory.
  if (!cfg.input_path.empty() && fs::path(cfg.input_path).is_relative() && path.has_parent_path())
    cfg.input_path = (path.parent_path() / cfg.input_path).string();
  return cfg;
}

// ---------------------------------------------------------------------------
// Stages

Stage parse_stage(const std::string& name) {
  static const std::map<std::string, Stage> stages{{"ingest", Stage::Ingest}, {"correct", Stage::Correct},
                                                   {"segment", Stage::Segment}, {"fit", Stage::Fit},
                                                   {"simulate", Stage::Simulate}, {"validate", Stage::Validate}};
  auto it = stages.find(name);
  if (it == stages.end())
    throw InputError("unknown stage '" + name + "' (expected ingest|correct|segment|fit|simulate|validate)");
  return it->second;
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Correct: return "correct";
    case Stage::Segment: return "segment";
    case Stage::Fit: return "fit";
    case Stage::Simulate: return "simulate";
    case Stage::Validate: return "validate";
  }
  return "?";
}

StageError::StageError(Stage stage, const std::string& message)
    : Error(to_string(stage) + " stage: " + message), stage_(stage) {}

std::string limit_tag(double fraction) { return csv::format_double(fraction); }

json FittedModel::to_json() const {
  return {{"kernel", kernel.to_json()},
          {"charge_model", charges.to_json()},
          {"sigma_observations", sigma_observations},
          {"sigma_fallbacks", sigma_fallbacks}};
}

FittedModel FittedModel::from_json(const json& doc) {
  try {
    FittedModel model;
    model.kernel = SemiMarkovKernel::from_json(doc.at("kernel"));
    model.charges = ChargeModel::from_json(doc.at("charge_model"));
    model.sigma_observations = doc.at("sigma_observations").get<std::size_t>();
    model.sigma_fallbacks = doc.at("sigma_fallbacks").get<std::size_t>();
    return model;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

FittedModel fit_model(const Segmentation& segmentation, double limit, double capacity, std::size_t min_sample,
                      std::uint64_t seed) {
  FittedModel model;
  model.kernel = estimate_kernel(segmentation.renewal);
  model.charges = ChargeModel(limit, capacity);

  std::map<SegmentKey, std::vector<ParamDraw>> triplets;
  std::map<std::pair<int, int>, std::vector<SigmaObservation>> sigma_obs;
  std::map<std::pair<int, int>, std::vector<SigmaEstimate>> sigma_terms;
  for (const auto& seg : segmentation.segments) {
    if (seg.censored || seg.from == State::Neutral) continue;
    const auto bridge = embed_bridge(seg);
    const auto peak = extract_peak(bridge);
    BridgeParams params;
    params.rho = compute_initial_power(seg.from, seg.entry_power, seg.sojourn, limit, capacity);
    params.tau = peak.tau;
    params.height = peak.height;
    triplets[{seg.from, seg.to, seg.sojourn}].push_back({params.rho, static_cast<double>(peak.tau), peak.height});

    const auto error = decompose(bridge, params, limit);
    try {
      const auto est = mle_sigma(error, peak.tau, seg.sojourn);
      const std::pair key{state_value(seg.from), state_value(seg.to)};
      sigma_obs[key].push_back({est.sigma, params.rho, peak.tau, peak.height, seg.sojourn});
      sigma_terms[key].push_back(est);
    } catch (const InsufficientDataError&) {
    }
  }

  for (const auto& [key, sample] : triplets) {
    const auto support = model.charges.support(key.from, key.sojourn);
    const auto tag = "fit:" + to_string(key.from) + ":" + to_string(key.to) + ":" + std::to_string(key.sojourn);
    model.charges.set_sampler(key, fit_joint_density(sample, support, min_sample, derive_seed(seed, tag)));
  }

  std::vector<SigmaEstimate> all_terms;
  for (const auto& [key, terms] : sigma_terms) all_terms.insert(all_terms.end(), terms.begin(), terms.end());
  const double global_sigma = all_terms.empty() ? kSigmaFloor : pool_sigma(all_terms).sigma;

  std::set<std::pair<int, int>> pairs;
  for (const auto& [key, sample] : triplets) pairs.insert({state_value(key.from), state_value(key.to)});
  for (const auto& pair : pairs) {
    const State from = state_from_value(pair.first);
    const State to = state_from_value(pair.second);
    const auto obs = sigma_obs.find(pair);
    SigmaModel sigma;
    try {
      if (obs == sigma_obs.end()) throw InsufficientDataError("no sigma observations");
      sigma = fit_sigma_regression(obs->second);
      sigma.from = from;
      sigma.to = to;
      model.sigma_observations += obs->second.size();
    } catch (const EstimationError& e) {
      const double pooled = obs == sigma_obs.end() ? global_sigma : pool_sigma(sigma_terms.at(pair)).sigma;
      log("sigma regression for (" + to_string(from) + ", " + to_string(to) + ") fell back to constant " +
          csv::format_double(pooled) + ": " + e.what());
      sigma = SigmaModel::constant(pooled, from, to);
      ++model.sigma_fallbacks;
    }
    model.charges.set_sigma_model(std::move(sigma));
  }
  return model;
}

namespace {

/// Writes through `<path>.partial` and renames on success; a failing writer
/// leaves the partial file behind.
template <typename Writer>
void write_artifact(const fs::path& path, Writer&& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path partial = path;
  partial += ".partial";
  writer(partial);
  fs::rename(partial, path);
}

void write_json(const fs::path& path, const json& doc) {
  write_artifact(path, [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write '" + p.string() + "'");
    out << doc.dump(2) << '\n';
  });
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_moments(const fs::path& path, const std::vector<MomentRow>& rows, const std::string& comment) {
  write_artifact(path, [&](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write '" + p.string() + "'");
    out << "# " << comment << '\n' << "t,mean,std,se_mean\n";
    for (const auto& r : rows)
      out << r.t << ',' << csv::format_double(r.mean) << ',' << csv::format_double(r.std_dev) << ','
          << csv::format_double(r.se_mean) << '\n';
  });
}

struct StoredMoments {
  std::vector<double> mean;
  std::vector<double> std_dev;
};

StoredMoments read_moments(const fs::path& path) {
  const auto table = csv::read(path);
  const auto mc = table.column("mean");
  const auto sc = table.column("std");
  StoredMoments m;
  for (const auto& row : table.rows) {
    m.mean.push_back(csv::to_double(row[mc]));
    m.std_dev.push_back(csv::to_double(row[sc]));
  }
  return m;
}

class StageRunner {
 public:
  explicit StageRunner(const RunConfig& config) : cfg_(config), files_{config.output_dir}, hash_(config.hash()) {}

  void ingest() {
    const double cap = cfg_.turbine.rated_capacity;
    PowerSeries generated;
    if (!cfg_.input_path.empty()) {
      if (!fs::exists(cfg_.input_path)) throw InputError("input file '" + cfg_.input_path + "' does not exist");
      const auto header = csv::read(cfg_.input_path).header;
      if (std::find(header.begin(), header.end(), "e") != header.end()) {
        generated = read_power_csv(cfg_.input_path, 0.0, cap);
        generated.corrected.clear();
        log("ingest: " + std::to_string(generated.size()) + " hourly power records");
      } else {
        const auto record = read_wind_csv(cfg_.input_path);
        write_artifact(files_.wind(), [&](const fs::path& p) { write_wind_csv(p, record, comment()); });
        generated = power_from_wind(record.speeds, cfg_.turbine);
        log("ingest: " + std::to_string(record.speeds.size()) + " hourly wind records");
      }
    } else {
      auto params = cfg_.synthetic;
      if (params.seed == 0) params.seed = derive_seed(cfg_.seed, "ingest");
      WindRecord record;
      record.speeds = generate_synthetic_wind(params);
      record.timestamps.reserve(record.speeds.size());
      for (std::size_t k = 0; k < record.speeds.size(); ++k) record.timestamps.push_back(std::to_string(k));
      write_artifact(files_.wind(), [&](const fs::path& p) { write_wind_csv(p, record, comment()); });
      generated = power_from_wind(record.speeds, cfg_.turbine);
      log("ingest: " + std::to_string(record.speeds.size()) + " synthetic hourly wind records");
    }
    write_artifact(files_.generated(), [&](const fs::path& p) { write_power_csv(p, generated, comment()); });
  }

  void correct() {
    const double cap = cfg_.turbine.rated_capacity;
    auto raw = read_power_csv(require(files_.generated(), Stage::Ingest), 0.0, cap);
    raw.corrected.clear();
    for (double f : cfg_.limits) {
      const auto corrected = apply_ramp_limit(raw, {f * cap, 1.0});
      write_artifact(files_.power(f), [&](const fs::path& p) { write_power_csv(p, corrected, comment(f)); });
    }
  }

  void segment() {
    for (double f : cfg_.limits) {
      const auto series = load_power(f);
      const auto seg = extract_segments(series, cfg_.sign_tolerance);
      write_artifact(files_.renewal(f), [&](const fs::path& p) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw InputError("cannot write '" + p.string() + "'");
        out << "# " << comment(f) << '\n' << "n,state,K,x,censored\n";
        for (const auto& r : seg.renewal)
          out << r.index << ',' << state_value(r.state) << ',' << r.jump_time << ',' << r.sojourn << ','
              << (r.censored ? 1 : 0) << '\n';
      });
      auto doc = estimate_kernel(seg.renewal).to_json();
      stamp(doc, f);
      write_json(files_.kernel(f), doc);
      log("segment " + limit_tag(f) + ": " + std::to_string(seg.renewal.size()) + " renewal points");
    }
  }

  void fit() {
    for (double f : cfg_.limits) {
      const auto series = load_power(f);
      const auto kernel = SemiMarkovKernel::from_json(read_json(require(files_.kernel(f), Stage::Segment)));
      const auto seg = extract_segments(series, cfg_.sign_tolerance);
      auto model = fit_model(seg, series.limit, cfg_.turbine.rated_capacity, cfg_.min_sample,
                             derive_seed(cfg_.seed, "fit:" + limit_tag(f)));
      model.kernel = kernel;
      auto doc = model.to_json();
      stamp(doc, f);
      write_json(files_.model(f), doc);
      log("fit " + limit_tag(f) + ": " + std::to_string(model.charges.samplers().size()) + " segment samplers, " +
          std::to_string(model.sigma_fallbacks) + " sigma fallbacks");
    }
  }

  void simulate() {
    for (double f : cfg_.limits) {
      const auto model = load_model(f);
      const auto starts = initial_conditions(f, model.kernel);
      const auto tag = "simulate:" + limit_tag(f);
      auto run_path = [&](std::size_t p) {
        Rng rng = make_rng(cfg_.seed, tag, p);
        InitialCondition init{State::Neutral, cfg_.battery.initial_soc, 0};
        if (!starts.empty())
          init = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
        return simulate_penalty_path(model.kernel, model.charges, cfg_.battery, cfg_.fees, 0, init, rng,
                                     static_cast<std::size_t>(cfg_.horizon));
      };
      const auto rows = mc_moments(
          [&](std::size_t p) {
            auto path = run_path(p);
            path.penalty.resize(static_cast<std::size_t>(cfg_.horizon) + 1);
            return path.penalty;
          },
          cfg_.paths, cfg_.horizon, 2, cfg_.fees, cfg_.threads);
      write_moments(files_.moments(f), rows, comment(f));

      for (std::size_t p = 0; p < std::min(cfg_.dump_paths, cfg_.paths); ++p) {
        const auto path = run_path(p);
        const auto file = files_.limit_dir(f) / "paths" / ("path_" + std::to_string(p) + ".csv");
        write_artifact(file, [&](const fs::path& out_path) {
          std::ofstream out(out_path, std::ios::binary);
          if (!out) throw InputError("cannot write '" + out_path.string() + "'");
          out << "# " << comment(f) << '\n' << "k,state,S,M,W\n";
          for (std::size_t k = 0; k < path.soc.size(); ++k)
            out << k << ',' << state_value(path.state[k]) << ',' << csv::format_double(path.soc[k]) << ','
                << csv::format_double(path.penalty[k]) << ',' << csv::format_double(path.discounted[k]) << '\n';
        });
      }
      log("simulate " + limit_tag(f) + ": mean W(" + std::to_string(cfg_.horizon) +
          ") = " + csv::format_double(rows.back().mean));
    }
  }

  void validate() {
    for (double f : cfg_.limits) {
      const auto model = load_model(f);
      const auto simulated = read_moments(require(files_.moments(f), Stage::Simulate));
      const auto series = load_power(f);
      const auto seg = extract_segments(series, cfg_.sign_tolerance);

      auto report = compare_segments(seg.segments, model.charges, cfg_.eligibility,
                                     derive_seed(cfg_.seed, "validate:" + limit_tag(f)), cfg_.threads);

      const auto real = empirical_penalty(series, cfg_.battery, cfg_.fees, cfg_.horizon, cfg_.sign_tolerance);
      if (real.windows.size() < 2) throw InputError("fewer than two full horizon windows in the input");
      const auto real_rows = sample_moments(real.windows, cfg_.horizon, 2, cfg_.fees.discount_rate);
      write_moments(files_.empirical_moments(f), real_rows, comment(f));

      const double n = static_cast<double>(cfg_.paths);
      std::vector<double> real_first, real_second, sim_first, sim_second;
      for (std::size_t t = 0; t < real_rows.size() && t < simulated.mean.size(); ++t) {
        real_first.push_back(real_rows[t].raw_moments[0]);
        real_second.push_back(real_rows[t].raw_moments[1]);
        sim_first.push_back(simulated.mean[t]);
        const double s = simulated.std_dev[t];
        sim_second.push_back(s * s * (n - 1.0) / n + simulated.mean[t] * simulated.mean[t]);
      }
      MomentComparison moments{f, {}, {}};
      try {
        moments.first = mape(real_first, sim_first);
        moments.second = mape(real_second, sim_second);
      } catch (const InputError&) {
        log("validate " + limit_tag(f) + ": empirical penalty is identically zero; MAPE undefined");
      }
      report.moments.push_back(moments);

      auto doc = report.to_json();
      stamp(doc, f);
      write_json(files_.report_json(f), doc);
      write_artifact(files_.report_csv(f), [&](const fs::path& p) { report.write_csv(p, comment(f)); });
      log("validate " + limit_tag(f) + ": " + std::to_string(report.groups.size()) +
          " eligible groups, mean L2 error " + csv::format_double(report.average_mean_error()) + "%, MAPE " +
          csv::format_double(moments.first.value));
    }
  }

 private:
  std::string comment(std::optional<double> f = std::nullopt) const {
    std::string c = "config_hash=" + hash_ + " seed=" + std::to_string(cfg_.seed);
    if (f) c += " limit=" + limit_tag(*f);
    return c;
  }

  void stamp(json& doc, double f) const {
    doc["config_hash"] = hash_;
    doc["seed"] = cfg_.seed;
    doc["limit_fraction"] = f;
  }

  static const fs::path& require(const fs::path& path, Stage producer) {
    if (!fs::exists(path))
      throw InputError("missing required file '" + path.string() + "' (produced by the " + to_string(producer) +
                       " stage)");
    return path;
  }

  PowerSeries load_power(double f) const {
    return read_power_csv(require(files_.power(f), Stage::Correct), f * cfg_.turbine.rated_capacity,
                          cfg_.turbine.rated_capacity);
  }

  FittedModel load_model(double f) const { return FittedModel::from_json(read_json(require(files_.model(f), Stage::Fit))); }

  std::vector<InitialCondition> initial_conditions(double f, const SemiMarkovKernel& kernel) const {
    if (cfg_.initial_law != "empirical") return {};
    const auto series = load_power(f);
    auto starts =
        empirical_penalty(series, cfg_.battery, cfg_.fees, cfg_.horizon, cfg_.sign_tolerance).starts;
    for (auto& s : starts)
      if (!kernel.has_transitions(s.state)) {
        s = {State::Neutral, s.soc, 0};
      } else if (kernel.survival(s.state, s.backward) <= 0.0) {
        s.backward = 0;
      }
    std::erase_if(starts, [&](const InitialCondition& s) { return !kernel.has_transitions(s.state); });
    return starts;
  }

  const RunConfig& cfg_;
  ArtifactPaths files_;
  std::string hash_;
};

}  // namespace

void run_stage(Stage stage, const RunConfig& config) {
  try {
    config.validate();
    StageRunner runner(config);
    switch (stage) {
      case Stage::Ingest: runner.ingest(); break;
      case Stage::Correct: runner.correct(); break;
      case Stage::Segment: runner.segment(); break;
      case Stage::Fit: runner.fit(); break;
      case Stage::Simulate: runner.simulate(); break;
      case Stage::Validate: runner.validate(); break;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void run_pipeline(const RunConfig& config) {
  for (Stage stage : {Stage::Ingest, Stage::Correct, Stage::Segment, Stage::Fit, Stage::Simulate, Stage::Validate})
    run_stage(stage, config);
}

}  // namespace rampsim
