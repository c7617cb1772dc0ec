#include <doctest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "xpra/synth.hpp"

using namespace xpra;
using testutil::kind_of;

TEST_CASE("generate is deterministic") {
  SynthSpec spec;
  spec.f = 10;
  spec.nm = 20;
  spec.r = 2;
  spec.d = 3;
  spec.s = 5;
  spec.seed = 7;
  const SynthInstance a = generate(spec), b = generate(spec);
  CHECK(a.Y == b.Y);
  CHECK(a.X0 == b.X0);
  CHECK(a.A0 == b.A0);
  CHECK(a.R == b.R);
  CHECK(a.seed_used == 7);
  spec.seed = 8;
  CHECK(generate(spec).Y != a.Y);
}

TEST_CASE("construction identities") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.f = 9;
    spec.nm = 14;
    spec.r = seed % 4;
    spec.d = 1 + seed % 5;
    spec.s = (seed * 3) % 12;
    spec.seed = seed;
    spec.kind = seed % 2 ? DictionaryKind::orthonormal_columns : DictionaryKind::gaussian_normalized;
    const SynthInstance in = generate(spec);
    CHECK(in.Y == in.X0 + in.R * in.A0);
    CHECK(std::size_t((in.A0.array() != 0.0).count()) == spec.s);
    const double peak = in.A0.cwiseAbs().maxCoeff();
    if (spec.s > 0) {
      CHECK(peak <= 1.5);
      CHECK((in.A0.array() == 0.0 || in.A0.array().abs() >= 0.5).all());
    }
    for (Eigen::Index j = 0; j < in.R.cols(); ++j)
      CHECK(std::abs(in.R.col(j).norm() - 1.0) < 1e-12);
    if (spec.s == 0) {
      CHECK_FALSE(in.report.has_value());
    } else {
      REQUIRE(in.report.has_value());
      CHECK(in.report->r == spec.r);
      if (spec.kind == DictionaryKind::orthonormal_columns) {
        CHECK(std::abs(in.report->F_L - 1.0) < 1e-12);
        CHECK(std::abs(in.report->F_U - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("degenerate parts") {
  SynthSpec spec;
  spec.s = 0;
  const SynthInstance no_sparse = generate(spec);
  CHECK(no_sparse.Y == no_sparse.X0);
  spec.s = 4;
  spec.r = 0;
  const SynthInstance no_low_rank = generate(spec);
  CHECK(no_low_rank.X0.isZero(0.0));
  CHECK(no_low_rank.Y == no_low_rank.R * no_low_rank.A0);
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.r = 11;
  CHECK(kind_of([&] { generate(spec); }) == ErrorKind::invalid_argument);
  spec = SynthSpec{};
  spec.d = 11;
  CHECK(kind_of([&] { generate(spec); }) == ErrorKind::thin_violation);
  spec = SynthSpec{};
  spec.s = 61;
  CHECK(kind_of([&] { generate(spec); }) == ErrorKind::invalid_argument);
  spec = SynthSpec{};
  spec.magnitude_low = 0.0;
  CHECK(kind_of([&] { generate(spec); }) == ErrorKind::invalid_argument);
}

TEST_CASE("recovery_error") {
  SynthSpec spec;
  spec.seed = 3;
  const SynthInstance in = generate(spec);
  const RecoveryError exact = recovery_error(in.X0, in.A0, in.X0, in.A0);
  CHECK(exact.rel_x == 0.0);
  CHECK(exact.rel_a == 0.0);
  CHECK(exact.support_f1 == 1.0);

  CHECK(recovery_error(in.X0, Matrix::Zero(3, 20), in.X0, in.A0).support_f1 == 0.0);

  Matrix E = Matrix::Zero(10, 20);
  E(4, 7) = 0.3;
  E(0, 0) = -0.4;
  const RecoveryError pert = recovery_error(in.X0 + E, in.A0, in.X0, in.A0);
  CHECK(pert.rel_x == doctest::Approx(0.5 / std::max(in.X0.norm(), 1.0)).epsilon(1e-12));

  // Small truth norms are measured against 1.
  Matrix tiny = Matrix::Zero(2, 2);
  tiny(0, 0) = 0.1;
  CHECK(recovery_error(tiny, tiny, Matrix::Zero(2, 2), tiny).rel_x == doctest::Approx(0.1));

  // Half the support found, nothing spurious: F1 = 2/3.
  Matrix A0 = Matrix::Zero(2, 2), Ah = Matrix::Zero(2, 2);
  A0(0, 0) = 1;
  A0(1, 1) = 1;
  Ah(0, 0) = 1;
  CHECK(recovery_error(Matrix::Zero(2, 2), Ah, Matrix::Zero(2, 2), A0).support_f1 ==
        doctest::Approx(2.0 / 3.0));
}
