// Sweeps the activity diagram of a three-level stable configuration on the
// all-ones kernel and prints the detected plateaus. The exact values lock
// onto low-denominator rationals over parameter intervals of positive length.

#include <cstdio>

#include "staircase/lab.hpp"

using namespace staircase;

int main() {
  StepGraphon carrier({parse_rational("2/7"), parse_rational("3/7"), parse_rational("2/7")},
                      {{Rational(1), Rational(1), Rational(1)},
                       {Rational(1), Rational(1), Rational(1)},
                       {Rational(1), Rational(1), Rational(1)}});
  ChipConfig chips(Context::graphon, {parse_rational("13/97"), parse_rational("41/97"),
                                      parse_rational("71/97")});

  std::vector<Rational> grid(257);
  for (int i = 0; i < 257; ++i) grid[i] = make_rational(i, 256);

  SweepOptions opts;
  opts.threads = 2;
  auto samples = activity_diagram(carrier, chips, grid, opts);
  auto plateaus = plateau_detect(samples);

  std::printf("%zu samples, %zu plateaus\n", samples.size(), plateaus.size());
  for (const auto& p : plateaus)
    std::printf("  s = %-8s on y in [%s, %s]%s\n", format_rational(p.value).c_str(),
                format_rational(p.from).c_str(), format_rational(p.to).c_str(),
                p.resolved ? "" : "  (unresolved level)");
  return 0;
}
