// Generates a teleport sequence and compares the tracker alone against the
// tracker with verification.

#include <cstdio>

#include "ptav/ptav.hpp"

int main() {
  ptav::SyntheticSpec spec;
  spec.name = "teleport";
  spec.teleport_frame = 50;
  spec.teleport_dx = 40.0;
  spec.teleport_dy = -30.0;
  const ptav::Sequence seq = ptav::generate_synthetic(spec);

  ptav::RunConfig cfg;
  for (bool verify : {false, true}) {
    cfg.use_verifier = verify;
    const ptav::EvaluationReport r = ptav::run_ope(seq, cfg);
    std::printf("%-14s DPR@20=%.3f OSR@0.5=%.3f AUC=%.3f corrections=%d\n", verify ? "with verifier" : "tracker only",
                r.dpr, r.osr, r.success.auc, r.corrections);
  }
  return 0;
}
