// Prints the reduced system generated for a given precision, with the exact
// coefficients the bookkeeping usually suppresses.

#include <cstdio>
#include <iostream>

#include "hfwave/reduced_system.hpp"

using namespace hfwave;

int main(int argc, char** argv) {
  int K = argc > 1 ? std::atoi(argv[1]) : 4;
  auto form = SystemForm::scalar(QuadForm::q0());
  auto sys = generate_reduced_system(K, form);
  std::cout << to_listing(sys);

  auto residual = reduced_system_residual(sys);
  std::cout << "\nresidual after matching: " << residual.str() << "\n";

  auto rep = verify_halfchessboard(K, form);
  std::cout << "half-chessboard pattern: " << (rep.pass ? "holds" : "violated") << "\n";

  // what goes wrong outside the null span
  auto lenient = generate_reduced_system_lenient(K, SystemForm::scalar(QuadForm::time_product()));
  std::cout << "\nwith the X0*Y0 probe, " << lenient.unmatched.size()
            << " terms have no slot; the first one:\n  band " << lenient.unmatched[0].band
            << ", harmonic " << lenient.unmatched[0].harmonic << ": "
            << lenient.unmatched[0].terms.str() << "\n";
  return 0;
}
