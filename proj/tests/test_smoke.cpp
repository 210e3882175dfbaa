#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csc/csc.hpp"

TEST_CASE("umbrella header compiles and a tiny pipeline runs") {
  const csc::LocalDictionary local = csc::random_local(4, 2, 7u);
  const csc::ConvDictionary D(local, 12);
  csc::Rng stream(7u);
  const csc::GeneratedSignal gen = csc::gen_signal(D, 3, stream);
  CHECK(csc::l0(gen.code.values()) == 3);
  CHECK(csc::l0_inf(gen.code, 4) >= 1);
  const csc::PursuitResult r = csc::omp(D, gen.signal, 3);
  CHECK(r.residual_norm < 1e-8);
}
