#include "crackpath/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace crackpath::io {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open for reading: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw Error(ErrorCategory::io, "read failed: " + path);
  }
  return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open for writing: " + path);
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out.good()) {
    throw Error(ErrorCategory::io, "write failed: " + path);
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::string hash_tag(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string("fnv1a:") + buf;
}

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCategory::parse, std::string("malformed JSON in ") + what);
  }
  return j;
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
  if (!j.contains(key)) {
    throw Error(ErrorCategory::parse, std::string(what) + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCategory::parse, std::string(what) + ": bad field '" + key + "'");
  }
}

json point_to_json(geometry::Point2 p) { return json::array({p.x, p.y}); }

geometry::Point2 point_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCategory::parse, std::string(what) + ": point must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

// --- microstructures ---

std::string to_json(const geometry::Microstructure& m) {
  json aggs = json::array();
  for (const auto& a : m.aggregates) {
    json verts = json::array();
    for (const auto v : a.vertices) verts.push_back(point_to_json(v));
    aggs.push_back(json{{"id", a.id}, {"vertices", verts}});
  }
  return dump(json{{"schema_version", 1},
                   {"width", m.width},
                   {"height", m.height},
                   {"aggregates", aggs}});
}

geometry::Microstructure microstructure_from_json(const std::string& text) {
  const json j = parse(text, "microstructure");
  geometry::Microstructure m;
  m.width = field<double>(j, "width", "microstructure");
  m.height = field<double>(j, "height", "microstructure");
  if (j.contains("aggregates")) {
    for (const auto& ja : j.at("aggregates")) {
      geometry::Aggregate a;
      a.id = field<int>(ja, "id", "aggregate");
      for (const auto& jv : ja.at("vertices")) {
        a.vertices.push_back(point_from_json(jv, "aggregate vertex"));
      }
      // Accept clockwise input and normalize the orientation.
      if (a.area() < 0.0) std::reverse(a.vertices.begin(), a.vertices.end());
      m.aggregates.push_back(std::move(a));
    }
  }
  geometry::validate(m);
  return m;
}

void save_microstructure(const geometry::Microstructure& m, const std::string& path) {
  write_file(path, to_json(m));
}

geometry::Microstructure load_microstructure(const std::string& path) {
  return microstructure_from_json(read_file(path));
}

std::string microstructure_id(const geometry::Microstructure& m) { return hash_tag(to_json(m)); }

// --- generation config ---

std::string to_json(const morphology::MorphologyConfig& c) {
  return dump(json{{"width", c.width},
                   {"height", c.height},
                   {"target_volume_fraction", c.target_volume_fraction},
                   {"n_min", c.n_min},
                   {"n_max", c.n_max},
                   {"circumradius_min", c.circumradius_min},
                   {"circumradius_max", c.circumradius_max},
                   {"min_gap", c.min_gap},
                   {"seed", c.seed},
                   {"max_attempts", c.max_attempts},
                   {"tolerance", c.tolerance}});
}

morphology::MorphologyConfig morphology_config_from_json(const std::string& text) {
  const json j = parse(text, "generation config");
  if (!j.is_object()) {
    throw Error(ErrorCategory::parse, "generation config: expected a JSON object");
  }
  morphology::MorphologyConfig c;
  const auto pick = [&](const char* key, auto& into) {
    if (j.contains(key)) {
      try {
        into = j.at(key).get<std::remove_reference_t<decltype(into)>>();
      } catch (const json::exception&) {
        throw Error(ErrorCategory::parse, std::string("generation config: bad field '") + key + "'");
      }
    }
  };
  pick("width", c.width);
  pick("height", c.height);
  pick("target_volume_fraction", c.target_volume_fraction);
  pick("n_min", c.n_min);
  pick("n_max", c.n_max);
  pick("circumradius_min", c.circumradius_min);
  pick("circumradius_max", c.circumradius_max);
  pick("min_gap", c.min_gap);
  pick("seed", c.seed);
  pick("max_attempts", c.max_attempts);
  pick("tolerance", c.tolerance);
  return c;
}

// --- kernel parameters ---

std::string to_json(const model::ModelParams& p) {
  return dump(json{{"schema_version", 1},
                   {"f1",
                    {{"mu1", p.f1.mu1},
                     {"mu2", p.f1.mu2},
                     {"mu3", p.f1.mu3},
                     {"mu4", p.f1.mu4},
                     {"mu5", p.f1.mu5},
                     {"mu6", p.f1.mu6}}},
                   {"f2",
                    {{"lambda1", p.f2.lambda1},
                     {"lambda2", p.f2.lambda2},
                     {"lambda3", p.f2.lambda3},
                     {"lambda4", p.f2.lambda4},
                     {"lambda5", p.f2.lambda5},
                     {"lambda6", p.f2.lambda6}}}});
}

model::ModelParams params_from_json(const std::string& text) {
  const json j = parse(text, "parameters");
  model::ModelParams p;
  const json jf1 = field<json>(j, "f1", "parameters");
  const json jf2 = field<json>(j, "f2", "parameters");
  p.f1.mu1 = field<double>(jf1, "mu1", "f1");
  p.f1.mu2 = field<double>(jf1, "mu2", "f1");
  p.f1.mu3 = field<double>(jf1, "mu3", "f1");
  p.f1.mu4 = field<double>(jf1, "mu4", "f1");
  p.f1.mu5 = field<double>(jf1, "mu5", "f1");
  p.f1.mu6 = field<double>(jf1, "mu6", "f1");
  p.f2.lambda1 = field<double>(jf2, "lambda1", "f2");
  p.f2.lambda2 = field<double>(jf2, "lambda2", "f2");
  p.f2.lambda3 = field<double>(jf2, "lambda3", "f2");
  p.f2.lambda4 = field<double>(jf2, "lambda4", "f2");
  p.f2.lambda5 = field<double>(jf2, "lambda5", "f2");
  p.f2.lambda6 = field<double>(jf2, "lambda6", "f2");
  model::validate(p);
  return p;
}

void save_params(const model::ModelParams& p, const std::string& path) {
  write_file(path, to_json(p));
}

model::ModelParams load_params(const std::string& path) {
  return params_from_json(read_file(path));
}

std::string params_fingerprint(const model::ModelParams& p) { return hash_tag(to_json(p)); }

// --- training sets ---

std::string to_json(const estimation::TrainingSet& ts) {
  json records = json::array();
  const auto emit = [&](const estimation::StepRecord& r, const char* config) {
    json cands = json::array();
    for (const auto& c : r.candidates) {
      cands.push_back(json::array({c.d_norm, c.theta_norm, c.same_aggregate ? 1 : 0}));
    }
    records.push_back(json{{"config", config},
                           {"source", r.source},
                           {"chosen", r.chosen_index},
                           {"candidates", cands}});
  };
  for (const auto& r : ts.records_f1) emit(r, "F1");
  for (const auto& r : ts.records_f2) emit(r, "F2");
  return dump(json{{"schema_version", 1}, {"provenance", ts.provenance}, {"records", records}});
}

estimation::TrainingSet training_from_json(const std::string& text) {
  const json j = parse(text, "training set");
  estimation::TrainingSet ts;
  if (j.contains("provenance")) {
    ts.provenance = j.at("provenance").get<std::vector<std::string>>();
  }
  for (const auto& jr : field<json>(j, "records", "training set")) {
    estimation::StepRecord r;
    const std::string config = field<std::string>(jr, "config", "record");
    if (config != "F1" && config != "F2") {
      throw Error(ErrorCategory::parse, "record: config must be F1 or F2");
    }
    r.configuration =
        config == "F1" ? geometry::Configuration::F1 : geometry::Configuration::F2;
    r.source = field<int>(jr, "source", "record");
    r.chosen_index = field<int>(jr, "chosen", "record");
    const json jc = field<json>(jr, "candidates", "record");
    for (const auto& c : jc) {
      if (!c.is_array() || c.size() != 3) {
        throw Error(ErrorCategory::parse, "record: candidate must be [d, theta, same]");
      }
      estimation::CandidateFeatures f;
      f.d_norm = c[0].get<double>();
      f.theta_norm = c[1].get<double>();
      f.same_aggregate = c[2].get<int>() != 0;
      if (f.d_norm < 0.0 || f.d_norm > 1.0 || f.theta_norm < 0.0 || f.theta_norm > 1.0) {
        throw Error(ErrorCategory::parse, "record: normalized indicators must be in [0, 1]");
      }
      if (f.same_aggregate && r.configuration != geometry::Configuration::F1) {
        throw Error(ErrorCategory::parse, "record: same-aggregate candidate in an F2 record");
      }
      r.candidates.push_back(f);
    }
    if (r.candidates.empty()) {
      throw Error(ErrorCategory::parse, "record: empty candidate list");
    }
    if (r.chosen_index < 0 || r.chosen_index >= static_cast<int>(r.candidates.size())) {
      throw Error(ErrorCategory::parse, "record: chosen index out of range");
    }
    if (r.configuration == geometry::Configuration::F1) {
      bool any_same = false;
      for (const auto& c : r.candidates) any_same |= c.same_aggregate;
      if (!any_same) {
        throw Error(ErrorCategory::parse, "record: F1 record without a same-aggregate candidate");
      }
      ts.records_f1.push_back(std::move(r));
    } else {
      ts.records_f2.push_back(std::move(r));
    }
  }
  return ts;
}

void save_training(const estimation::TrainingSet& ts, const std::string& path) {
  write_file(path, to_json(ts));
}

estimation::TrainingSet load_training(const std::string& path) {
  return training_from_json(read_file(path));
}

// --- ensembles ---

std::string to_json(const prediction::Ensemble& e, const std::string& params_fingerprint) {
  json paths = json::array();
  for (const auto& p : e.paths) {
    json pts = json::array();
    for (const auto q : p.points) pts.push_back(point_to_json(q));
    paths.push_back(json{{"seed", p.seed},
                         {"start", point_to_json(p.start)},
                         {"steps", p.steps},
                         {"points", pts}});
  }
  return dump(json{{"schema_version", 1},
                   {"microstructure_id", e.microstructure_id},
                   {"width", e.width},
                   {"height", e.height},
                   {"master_seed", e.master_seed},
                   {"params_fingerprint", params_fingerprint},
                   {"paths", paths}});
}

prediction::Ensemble ensemble_from_json(const std::string& text) {
  const json j = parse(text, "ensemble");
  prediction::Ensemble e;
  e.microstructure_id = field<std::string>(j, "microstructure_id", "ensemble");
  e.width = field<double>(j, "width", "ensemble");
  e.height = field<double>(j, "height", "ensemble");
  e.master_seed = field<std::uint64_t>(j, "master_seed", "ensemble");
  for (const auto& jp : field<json>(j, "paths", "ensemble")) {
    prediction::CrackPath p;
    p.seed = field<std::uint64_t>(jp, "seed", "path");
    p.start = point_from_json(jp.at("start"), "path start");
    p.steps = field<int>(jp, "steps", "path");
    for (const auto& q : field<json>(jp, "points", "path")) {
      p.points.push_back(point_from_json(q, "path point"));
    }
    if (p.points.empty()) {
      throw Error(ErrorCategory::parse, "ensemble: path without points");
    }
    p.point_indices.assign(p.points.size(), -1);
    e.paths.push_back(std::move(p));
  }
  if (e.paths.empty()) {
    throw Error(ErrorCategory::parse, "ensemble: no paths");
  }
  return e;
}

void save_ensemble(const prediction::Ensemble& e, const std::string& params_fingerprint,
                   const std::string& path) {
  write_file(path, to_json(e, params_fingerprint));
}

prediction::Ensemble load_ensemble(const std::string& path) {
  return ensemble_from_json(read_file(path));
}

// --- derived outputs ---

std::string discretized_to_json(const geometry::DiscretizedMicrostructure& dm) {
  json points = json::array();
  for (const auto& p : dm.points) {
    json sides = json::array();
    sides.push_back(json::array({p.side.side, p.side.slot}));
    if (p.corner_side) {
      sides.push_back(json::array({p.corner_side->side, p.corner_side->slot}));
    }
    points.push_back(json{{"index", p.index},
                          {"position", point_to_json(p.position)},
                          {"aggregate", p.aggregate_id},
                          {"sides", sides}});
  }
  return dump(json{{"schema_version", 1},
                   {"points_per_side", dm.points_per_side},
                   {"points", points}});
}

std::string statistics_to_json(const prediction::Ensemble& e,
                               const analysis::EnsembleStatistics& stats) {
  json j{{"schema_version", 1},
         {"microstructure_id", e.microstructure_id},
         {"n_paths", e.paths.size()},
         {"median", {{"index", stats.median_index}}}};
  json median_pts = json::array();
  for (const auto p : e.paths[stats.median_index].points) median_pts.push_back(point_to_json(p));
  j["median"]["points"] = median_pts;

  if (stats.region) {
    j["confidence_region"] = {{"grid", stats.region->grid},
                              {"lower", stats.region->lower},
                              {"upper", stats.region->upper},
                              {"diameter", stats.region->diameter},
                              {"lower_order_index", stats.region->lower_order_index},
                              {"upper_order_index", stats.region->upper_order_index}};
  }
  j["tortuosity"] = {{"values", stats.tortuosity.values},
                     {"median", stats.tortuosity.median},
                     {"p05", stats.tortuosity.p05},
                     {"p95", stats.tortuosity.p95},
                     {"histogram",
                      {{"edges", stats.tortuosity.histogram.edges},
                       {"counts", stats.tortuosity.histogram.counts}}}};
  if (stats.kde_density) {
    j["kde"] = {{"grid", stats.kde_density->grid},
                {"density", stats.kde_density->density},
                {"bandwidth", stats.kde_density->bandwidth}};
  }
  return dump(j);
}

std::string fit_report_json(const estimation::FitResult& r) {
  const auto config_json = [](const estimation::ConfigFit& c) {
    return json{{"log_likelihood", c.log_likelihood},
                {"iterations", c.iterations},
                {"converged", c.converged},
                {"identifiable", c.identifiable},
                {"clamped", c.clamped}};
  };
  return dump(json{{"schema_version", 1},
                   {"log_likelihood", r.log_likelihood},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"identifiable", r.identifiable},
                   {"clamped", r.clamped},
                   {"n_starts", r.n_starts},
                   {"f1", config_json(r.f1)},
                   {"f2", config_json(r.f2)}});
}

std::string covariogram_csv(const morphology::CovariogramEstimate& est) {
  std::string out = "lag,value,samples_kept\n";
  for (std::size_t i = 0; i < est.lags.size(); ++i) {
    out += format_double(est.lags[i]);
    out += ',';
    out += format_double(est.values[i]);
    out += ',';
    out += std::to_string(est.kept[i]);
    out += '\n';
  }
  return out;
}

std::string stability_csv(const std::vector<estimation::StabilityRow>& rows) {
  std::string out =
      "size,mu1,mu2,mu3,mu4,mu5,mu6,lambda1,lambda2,lambda3,lambda4,lambda5,lambda6,"
      "log_likelihood_f1,log_likelihood_f2\n";
  for (const auto& r : rows) {
    out += std::to_string(r.size);
    for (const double v : r.params.f1.as_array()) {
      out += ',';
      out += format_double(v);
    }
    for (const double v : r.params.f2.as_array()) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += format_double(r.log_likelihood_f1);
    out += ',';
    out += format_double(r.log_likelihood_f2);
    out += '\n';
  }
  return out;
}

std::string region_csv(const analysis::ConfidenceRegion& region,
                       const std::vector<double>& median_values) {
  std::string out = "x,lower,median,upper\n";
  for (std::size_t j = 0; j < region.grid.size(); ++j) {
    out += format_double(region.grid[j]);
    out += ',';
    out += format_double(region.lower[j]);
    out += ',';
    out += format_double(j < median_values.size() ? median_values[j] : 0.0);
    out += ',';
    out += format_double(region.upper[j]);
    out += '\n';
  }
  return out;
}

}  // namespace crackpath::io
