// Holder estimates and quadratic variation for a Brownian path, a rough fBM
// path and the two deterministic fields.
#include <cstdio>

#include "rough/rough.hpp"

using namespace rough;

static void report(const char* name, const CoefficientField& c, const PartitionSequence& seq) {
  const SchauderBasis basis(seq, seq.depth() - 1);
  const auto x = reconstruct_on_grid(c, basis);
  const auto est = holder_exponent_estimate(c, seq, {});
  std::printf("%-22s alpha_hat=%.3f (%s)  qv(1)=%.4f\n", name, est.alpha_hat, std::string(to_string(est.branch)).c_str(),
              pth_variation(x, seq, seq.depth(), 2.0, 1.0));
}

int main() {
  const int depth = 12;
  const auto seq = PartitionSequence::dyadic(1.0, depth);

  PathConfig bm;
  bm.seed = 11;
  bm.max_level = depth - 1;
  report("Brownian", PathGenerator(seq, bm).coefficients(0), seq);

  PathConfig fbm = bm;
  fbm.H = 0.25;
  report("fBM H=0.25", PathGenerator(seq, fbm).coefficients(0), seq);

  report("example a (eps0=0.2)", deterministic_example_a(0.2, depth), seq);
  report("example b", deterministic_example_b(depth), seq);
}
