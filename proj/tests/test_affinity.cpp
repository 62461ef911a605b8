#include <doctest.h>

#include <cmath>

#include "affsup/affinity.hpp"
#include "affsup/gradcheck.hpp"
#include "affsup/rng.hpp"
#include "affsup/softmax.hpp"

using namespace affsup;

namespace {

TargetMatrix random_target(std::size_t n, RngStream& rng, double p = 0.3) {
  TargetMatrix t(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && rng.uniform() < p) t.set(i, j);
  if (t.count() == 0) t.set(0, 1);
  return t;
}

// Independent oracle: normalize and accumulate with plain double loops.
double brute_force_mass(const MatD& raw, const TargetMatrix& t,
                        SoftmaxScope scope) {
  const std::size_t n = t.n();
  if (scope == SoftmaxScope::MatrixWise) {
    double mx = raw.data()[0];
    for (std::size_t i = 0; i < raw.size(); ++i)
      mx = std::max(mx, raw.data()[i]);
    double z = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i)
      z += std::exp(raw.data()[i] - mx);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (t.at(i, j)) mass += std::exp(raw(i, j) - mx) / z;
    return mass;
  }
  double total = 0.0;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!t.row_has_target(i)) continue;
    double mx = raw(i, 0);
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, raw(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(raw(i, j) - mx);
    double mi = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (t.at(i, j)) mi += std::exp(raw(i, j) - mx) / z;
    total += mi;
    ++rows;
  }
  return rows ? total / rows : 0.0;
}

}  // namespace

TEST_CASE("affinity_dot examples") {
  // orthonormal features, identity projections: raw = I / sqrt(d)
  const std::size_t d = 4;
  MatD feats(3, d);
  feats(0, 0) = 1.0;
  feats(1, 1) = 1.0;
  feats(2, 2) = 1.0;
  const MatD eye = MatD::identity(d);
  const auto aff = affinity_dot(feats, eye, eye);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(aff.raw(i, j) ==
            doctest::Approx(i == j ? 0.5 : 0.0).epsilon(1e-12));

  // identical e1 features, d_k = 4: entry = 1/sqrt(4) = 0.5
  MatD same(2, d);
  same(0, 0) = 1.0;
  same(1, 0) = 1.0;
  const auto aff2 = affinity_dot(same, eye, eye);
  CHECK(aff2.raw(0, 1) == doctest::Approx(0.5));

  // zero features -> zero raw
  const auto aff3 = affinity_dot(MatD(3, d), eye, eye);
  for (std::size_t i = 0; i < aff3.raw.size(); ++i)
    CHECK(aff3.raw.data()[i] == 0.0);

  CHECK_THROWS_AS(affinity_dot(MatD(2, 3), MatD(4, 2), MatD(4, 2)), ShapeError);
}

TEST_CASE("affinity_l2 examples") {
  // identical rows -> zero matrix
  MatD same(3, 2, 0.5);
  const auto a1 = affinity_l2(same);
  for (std::size_t i = 0; i < a1.raw.size(); ++i)
    CHECK(a1.raw.data()[i] == 0.0);

  // (0,0) vs (1,1): -||.||^2/2 = -1
  const MatD two(2, 2, {0.0, 0.0, 1.0, 1.0});
  const auto a2 = affinity_l2(two);
  CHECK(a2.raw(0, 1) == doctest::Approx(-1.0));
  CHECK(a2.raw(1, 0) == doctest::Approx(-1.0));
  CHECK(a2.raw(0, 0) == 0.0);

  // N=1 degenerate
  const auto a3 = affinity_l2(MatD(1, 5, 2.0));
  CHECK(a3.raw.rows() == 1);
  CHECK(a3.raw(0, 0) == 0.0);

  // symmetry + non-positivity on random input
  RngStream rng(5);
  MatD f(6, 4);
  rng.fill_uniform(f, -2.0, 2.0);
  const auto a4 = affinity_l2(f);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(a4.raw(i, j) == a4.raw(j, i));
      CHECK(a4.raw(i, j) <= 0.0);
    }
}

TEST_CASE("target_mass examples and oracle") {
  // uniform W, all-ones off-diagonal target, N=3 -> 6/9
  MatD uniform(3, 3, 1.0);
  TargetMatrix t(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) t.set(i, j);
  AffinityMatrix<double> aff(uniform);
  const MassReport rep = target_mass(aff, t, SoftmaxScope::MatrixWise);
  CHECK(rep.mass == doctest::Approx(6.0 / 9).epsilon(1e-12));
  CHECK(rep.selected_count == 6);

  // zero target -> mass 0
  const MassReport zero =
      target_mass(aff, TargetMatrix(3), SoftmaxScope::MatrixWise);
  CHECK(zero.mass == 0.0);
  CHECK(zero.selected_count == 0);

  // hypothetical full target including the diagonal -> mass 1
  TargetMatrix full(3, TargetMatrix::DiagPolicy::Keep);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) full.set(i, j);
  CHECK(target_mass(aff, full, SoftmaxScope::MatrixWise).mass ==
        doctest::Approx(1.0).epsilon(1e-12));

  // brute-force double-loop oracle, both scopes
  RngStream rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    MatD raw(n, n);
    rng.fill_uniform(raw, -4.0, 4.0);
    TargetMatrix target = random_target(n, rng);
    AffinityMatrix<double> w(raw);
    for (const SoftmaxScope scope :
         {SoftmaxScope::MatrixWise, SoftmaxScope::RowWise}) {
      const double want = brute_force_mass(raw, target, scope);
      CHECK(target_mass(w, target, scope).mass ==
            doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("mass_loss value examples") {
  LossConfig cfg;

  // M = 1 exactly (full target incl. diagonal): focal loss 0 for any gamma
  MatD uniform(3, 3, 0.7);
  TargetMatrix full(3, TargetMatrix::DiagPolicy::Keep);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) full.set(i, j);
  for (const double g : {0.0, 2.0, 5.0}) {
    cfg.form = LossForm::Focal;
    cfg.gamma = g;
    const auto res = mass_loss(AffinityMatrix<double>(uniform), full, cfg);
    CHECK(std::abs(res.loss) < 1e-9);
  }

  // M = 0.5 with gamma 0 -> ln 2 (2x2 uniform, off-diagonal target)
  MatD w2(2, 2, 0.0);
  TargetMatrix half(2);
  half.set_pair(0, 1);
  cfg.gamma = 0.0;
  const auto res_half = mass_loss(AffinityMatrix<double>(w2), half, cfg);
  CHECK(res_half.report.mass == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(res_half.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  // smooth L1 knee at x = 0.5: both branches give 0.25
  cfg.form = LossForm::SmoothL1;
  const auto res_knee = mass_loss(AffinityMatrix<double>(w2), half, cfg);
  CHECK(res_knee.loss == doctest::Approx(0.25).epsilon(1e-9));

  // larger gamma shrinks the focal loss at equal M < 1
  cfg.form = LossForm::Focal;
  cfg.gamma = 2.0;
  const double l2 = mass_loss(AffinityMatrix<double>(w2), half, cfg).loss;
  cfg.gamma = 5.0;
  const double l5 = mass_loss(AffinityMatrix<double>(w2), half, cfg).loss;
  CHECK(l5 < l2);

  // gamma < 0 rejected
  cfg.gamma = -1.0;
  CHECK_THROWS_AS(mass_loss(AffinityMatrix<double>(w2), half, cfg),
                  ConfigError);

  // degenerate target under log-based forms
  cfg.gamma = 2.0;
  CHECK_THROWS_AS(mass_loss(AffinityMatrix<double>(w2), TargetMatrix(2), cfg),
                  DegenerateTargetError);
  cfg.form = LossForm::RowFocal;
  CHECK_THROWS_AS(mass_loss(AffinityMatrix<double>(w2), TargetMatrix(2), cfg),
                  DegenerateTargetError);
  // ...but L2 form tolerates it (mass 0, loss 1)
  cfg.form = LossForm::L2;
  const auto res_l2 = mass_loss(AffinityMatrix<double>(w2), TargetMatrix(2), cfg);
  CHECK(res_l2.report.mass == 0.0);
  CHECK(res_l2.loss == doctest::Approx(1.0));
}

TEST_CASE("entry BCE at zero scores gives ln 2 regardless of target") {
  RngStream rng(17);
  LossConfig cfg;
  cfg.form = LossForm::EntryBCE;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    const TargetMatrix t = random_target(n, rng, rng.uniform());
    const auto res = mass_loss(AffinityMatrix<double>(MatD(n, n)), t, cfg);
    CHECK(res.loss == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }
  // without normalization the loss scales by N^2
  cfg.bce_normalize = false;
  const TargetMatrix t2 = random_target(3, rng);
  const auto res = mass_loss(AffinityMatrix<double>(MatD(3, 3)), t2, cfg);
  CHECK(res.loss == doctest::Approx(9.0 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("focal loss is shift invariant") {
  RngStream rng(23);
  MatD raw(5, 5);
  rng.fill_uniform(raw, -2.0, 2.0);
  const TargetMatrix t = random_target(5, rng);
  LossConfig cfg;
  for (const SoftmaxScope scope :
       {SoftmaxScope::MatrixWise, SoftmaxScope::RowWise}) {
    cfg.scope = scope;
    const double base = mass_loss(AffinityMatrix<double>(raw), t, cfg).loss;
    MatD shifted = raw;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted.data()[i] += 42.5;
    const double moved =
        mass_loss(AffinityMatrix<double>(shifted), t, cfg).loss;
    CHECK(moved == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("analytic gradients match finite differences for every form/scope") {
  RngStream rng(47);
  for (const LossForm form : {LossForm::L2, LossForm::SmoothL1, LossForm::Focal,
                              LossForm::RowFocal, LossForm::EntryBCE}) {
    for (const SoftmaxScope scope :
         {SoftmaxScope::MatrixWise, SoftmaxScope::RowWise}) {
      CAPTURE(loss_form_name(form));
      CAPTURE(scope_name(scope));
      LossConfig cfg;
      cfg.form = form;
      cfg.scope = scope;
      cfg.gamma = 2.0;
      double worst = 0.0;
      for (int trial = 0; trial < 10; ++trial) {
        MatD raw(8, 8);
        rng.fill_uniform(raw, -2.0, 2.0);
        const TargetMatrix t = random_target(8, rng);
        const auto res = mass_loss(AffinityMatrix<double>(raw), t, cfg);
        const double err = grad_check(
            [&](const MatD& x) {
              return mass_loss(AffinityMatrix<double>(x), t, cfg).loss;
            },
            res.grad_raw, raw, 1e-5);
        worst = std::max(worst, err);
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("focal mass grad check mirrors the numerics example") {
  RngStream rng(8);
  MatD raw(8, 8);
  rng.fill_uniform(raw, -1.0, 1.0);
  const TargetMatrix t = random_target(8, rng);
  LossConfig cfg;
  cfg.gamma = 2.0;
  const auto res = mass_loss(AffinityMatrix<double>(raw), t, cfg);
  CHECK(grad_check(
            [&](const MatD& x) {
              return mass_loss(AffinityMatrix<double>(x), t, cfg).loss;
            },
            res.grad_raw, raw, 1e-5) < 1e-4);
}

TEST_CASE("gradient descent on raw scores raises the mass monotonically") {
  RngStream rng(91);
  MatD raw(8, 8);
  rng.fill_uniform(raw, -1.0, 1.0);
  const TargetMatrix t = random_target(8, rng);
  LossConfig cfg;
  cfg.gamma = 2.0;
  double prev = target_mass(AffinityMatrix<double>(raw), t,
                            SoftmaxScope::MatrixWise)
                    .mass;
  for (int step = 0; step < 100; ++step) {
    const auto res = mass_loss(AffinityMatrix<double>(raw), t, cfg);
    for (std::size_t i = 0; i < raw.size(); ++i)
      raw.data()[i] -= 0.1 * res.grad_raw.data()[i];
    const double m = target_mass(AffinityMatrix<double>(raw), t,
                                 SoftmaxScope::MatrixWise)
                         .mass;
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("combine_losses") {
  LossConfig cfg;
  const std::vector<MatD> main_g = {MatD(2, 2, 1.0), MatD(1, 3, 2.0)};
  const std::vector<MatD> aff_g = {MatD(2, 2, 10.0), MatD(1, 3, -4.0)};

  cfg.lambda = 0.0;
  auto [total0, merged0] = combine_losses(1.5, main_g, 7.0, aff_g, cfg);
  CHECK(total0 == 1.5);
  CHECK(merged0[0] == main_g[0]);
  CHECK(merged0[1] == main_g[1]);

  cfg.lambda = 0.1;
  auto [total1, merged1] = combine_losses(1.0, main_g, 2.0, aff_g, cfg);
  CHECK(total1 == doctest::Approx(1.2));
  CHECK(merged1[0](0, 0) == doctest::Approx(2.0));

  // lambda = 0.01, equal unit losses -> 1.01
  cfg.lambda = 0.01;
  auto [total2, merged2] = combine_losses(1.0, main_g, 1.0, aff_g, cfg);
  CHECK(total2 == doctest::Approx(1.01));
  (void)merged2;

  const std::vector<MatD> wrong = {MatD(2, 2, 1.0)};
  CHECK_THROWS_AS(combine_losses(1.0, main_g, 1.0, wrong, cfg), ShapeError);
}

TEST_CASE("affinity_l2_feature_grad matches finite differences") {
  RngStream rng(63);
  MatD f(5, 3);
  rng.fill_uniform(f, -1.5, 1.5);
  const TargetMatrix t = random_target(5, rng);
  LossConfig cfg;
  cfg.gamma = 2.0;
  const auto loss_of = [&](const MatD& feats) {
    return mass_loss(affinity_l2(feats), t, cfg).loss;
  };
  const auto res = mass_loss(affinity_l2(f), t, cfg);
  const MatD grad = affinity_l2_feature_grad(f, res.grad_raw);
  CHECK(grad_check(loss_of, grad, f, 1e-5) < 1e-4);
}

TEST_CASE("target matrix forces a zero diagonal") {
  TargetMatrix t(4);
  t.set(2, 2);
  CHECK_FALSE(t.at(2, 2));
  t.set_pair(1, 3);
  CHECK(t.at(1, 3));
  CHECK(t.at(3, 1));
  CHECK(t.count() == 2);
}
