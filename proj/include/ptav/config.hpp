#pragma once

#include <chrono>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "ptav/dcf_tracker.hpp"
#include "ptav/engine.hpp"
#include "ptav/key_value.hpp"
#include "ptav/verifier.hpp"

namespace ptav {

/// Every tunable of a run. Defaults: lambda 0.01, eta 0.025, V 10,
/// tau1 1.0, tau2 1.6, beta 1.5.
struct RunConfig {
  // tracker
  double lambda = 0.01;
  double eta = 0.025;
  double padding = 2.0;
  double sigma_factor = 1.0 / 16.0;
  int cell_size = 4;
  int pca_dims = 5;
  int num_scales = 17;
  double scale_step = 1.02;
  double scale_sigma = 1.0;
  bool subpixel = false;
  // verifier
  bool use_verifier = true;
  double tau1 = 1.0;
  double tau2 = 1.6;
  double beta = 1.5;
  double beta_max = 4.0;
  double beta_step = 0.5;
  int stride = 0;
  std::vector<double> candidate_scales{0.95, 1.0, 1.05};
  int refine_top = 3;
  // engine
  int interval = 10;
  int interval_min = 1;
  ExecutionMode mode = ExecutionMode::deterministic;
  int latency = 2;
  int verifier_delay_ms = 0;
  int queue_capacity = 16;
  std::uint32_t seed = 7;

  DcfParams tracker_params() const {
    DcfParams p;
    p.lambda = lambda;
    p.eta = eta;
    p.padding = padding;
    p.sigma_factor = sigma_factor;
    p.cell_size = cell_size;
    p.pca_dims = pca_dims;
    p.subpixel = subpixel;
    p.scale.num_scales = num_scales;
    p.scale.scale_step = scale_step;
    p.scale.label_sigma = scale_sigma;
    return p;
  }

  DetectionConfig detection() const {
    DetectionConfig d;
    d.tau1 = tau1;
    d.tau2 = tau2;
    d.beta = beta;
    d.beta_default = beta;
    d.beta_max = beta_max;
    d.beta_step = beta_step;
    d.stride = stride;
    d.candidate_scales = candidate_scales;
    d.refine_top = refine_top;
    return d;
  }

  EngineConfig engine() const {
    EngineConfig e;
    e.interval_default = interval;
    e.interval_min = interval_min;
    e.mode = mode;
    e.latency_frames = latency;
    e.verifier_delay = std::chrono::milliseconds(verifier_delay_ms);
    e.queue_capacity = static_cast<std::size_t>(queue_capacity);
    return e;
  }
};

inline std::string to_string(ExecutionMode m) { return m == ExecutionMode::parallel ? "parallel" : "deterministic"; }

inline ExecutionMode parse_mode(const std::string& v) {
  if (v == "parallel") return ExecutionMode::parallel;
  if (v == "deterministic") return ExecutionMode::deterministic;
  throw ConfigError("mode: expected parallel or deterministic, got '" + v + "'");
}

inline void validate(const RunConfig& c) {
  validate(c.tracker_params());
  validate(c.detection());
  validate(c.engine());
  if (c.queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  if (!(c.scale_sigma > 0.0)) throw ConfigError("scale_sigma must be > 0");
}

// Applies the keys present in `kv` on top of `base`.
inline RunConfig apply(RunConfig c, const KeyValueFile& kv) {
  for (const auto& [key, v] : kv.values()) {
    if (key == "lambda") c.lambda = parse_double(key, v);
    else if (key == "eta") c.eta = parse_double(key, v);
    else if (key == "padding") c.padding = parse_double(key, v);
    else if (key == "sigma_factor") c.sigma_factor = parse_double(key, v);
    else if (key == "cell_size") c.cell_size = parse_int(key, v);
    else if (key == "pca_dims") c.pca_dims = parse_int(key, v);
    else if (key == "num_scales") c.num_scales = parse_int(key, v);
    else if (key == "scale_step") c.scale_step = parse_double(key, v);
    else if (key == "scale_sigma") c.scale_sigma = parse_double(key, v);
    else if (key == "subpixel") c.subpixel = parse_bool(key, v);
    else if (key == "verifier") c.use_verifier = parse_bool(key, v);
    else if (key == "tau1") c.tau1 = parse_double(key, v);
    else if (key == "tau2") c.tau2 = parse_double(key, v);
    else if (key == "beta") c.beta = parse_double(key, v);
    else if (key == "beta_max") c.beta_max = parse_double(key, v);
    else if (key == "beta_step") c.beta_step = parse_double(key, v);
    else if (key == "stride") c.stride = parse_int(key, v);
    else if (key == "candidate_scales") c.candidate_scales = parse_double_list(key, v);
    else if (key == "refine_top") c.refine_top = parse_int(key, v);
    else if (key == "V") c.interval = parse_int(key, v);
    else if (key == "V_min") c.interval_min = parse_int(key, v);
    else if (key == "mode") c.mode = parse_mode(v);
    else if (key == "latency") c.latency = parse_int(key, v);
    else if (key == "verifier_delay_ms") c.verifier_delay_ms = parse_int(key, v);
    else if (key == "queue_capacity") c.queue_capacity = parse_int(key, v);
    else if (key == "seed") c.seed = static_cast<std::uint32_t>(parse_int(key, v));
    else throw ConfigError(key + ": unknown configuration key");
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) { return apply(RunConfig{}, KeyValueFile::load(path)); }

// Effective configuration in the same format `apply` reads.
inline std::string to_text(const RunConfig& c) {
  std::ostringstream os;
  std::string scales;
  for (std::size_t i = 0; i < c.candidate_scales.size(); ++i) {
    if (i) scales += ",";
    scales += exact_num(c.candidate_scales[i]);
  }
  os << "lambda = " << exact_num(c.lambda) << "\neta = " << exact_num(c.eta) << "\npadding = " << exact_num(c.padding)
     << "\nsigma_factor = " << exact_num(c.sigma_factor) << "\ncell_size = " << c.cell_size
     << "\npca_dims = " << c.pca_dims << "\nnum_scales = " << c.num_scales
     << "\nscale_step = " << exact_num(c.scale_step) << "\nscale_sigma = " << exact_num(c.scale_sigma)
     << "\nsubpixel = " << (c.subpixel ? "true" : "false") << "\nverifier = " << (c.use_verifier ? "true" : "false")
     << "\ntau1 = " << exact_num(c.tau1) << "\ntau2 = " << exact_num(c.tau2) << "\nbeta = " << exact_num(c.beta)
     << "\nbeta_max = " << exact_num(c.beta_max) << "\nbeta_step = " << exact_num(c.beta_step)
     << "\nstride = " << c.stride << "\ncandidate_scales = " << scales
     << "\nrefine_top = " << c.refine_top << "\nV = " << c.interval
     << "\nV_min = " << c.interval_min << "\nmode = " << to_string(c.mode) << "\nlatency = " << c.latency
     << "\nverifier_delay_ms = " << c.verifier_delay_ms << "\nqueue_capacity = " << c.queue_capacity
     << "\nseed = " << c.seed << "\n";
  return os.str();
}

}  // namespace ptav
