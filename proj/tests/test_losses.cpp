#include <doctest.h>

#include <cmath>

#include "condiv/divergence_net.hpp"
#include "condiv/grad_check.hpp"
#include "condiv/losses.hpp"
#include "condiv/rng.hpp"

#include "oracles.hpp"

using namespace condiv;
using losses::KernelKind;
using losses::SimilarityKernel;

namespace {

Tensor matrix_from(const oracles::Matrix& rows) {
  const std::size_t n = rows.size(), d = rows[0].size();
  std::vector<double> flat;
  flat.reserve(n * d);
  for (const auto& row : rows)
    flat.insert(flat.end(), row.begin(), row.end());
  return Tensor::from_data({n, d}, std::move(flat));
}

oracles::Matrix random_rows(Rng& rng, std::size_t n, std::size_t d) {
  oracles::Matrix rows(n, std::vector<double>(d));
  for (auto& row : rows)
    for (double& v : row) v = rng.normal();
  return rows;
}

}  // namespace

TEST_CASE("cosine similarity matrix basics") {
  Tensor z = Tensor::from_data({2, 2}, {1, 0, 0, 1});
  Tensor s = losses::cosine_sim_matrix(z);
  CHECK(s.at(0, 1) == doctest::Approx(0.0));
  CHECK(s.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  Tensor same = Tensor::from_data({2, 2}, {2, 3, 2, 3});
  CHECK(losses::cosine_sim_matrix(same).at(0, 1) ==
        doctest::Approx(1.0).epsilon(1e-12));

  Tensor mixed = Tensor::from_data({2, 2}, {1, 1, 1, 0});
  CHECK(losses::cosine_sim_matrix(mixed).at(0, 1) ==
        doctest::Approx(0.70711).epsilon(1e-4));

  Tensor zero_row = Tensor::from_data({2, 2}, {0, 0, 1, 0});
  CHECK_THROWS_WITH_AS(losses::cosine_sim_matrix(zero_row),
                       "cosine_sim_matrix: row 0 has (near-)zero norm", Error);
}

TEST_CASE("cosine matrix symmetry and range on random input") {
  Rng rng(3);
  Tensor z = matrix_from(random_rows(rng, 7, 5));
  Tensor s = losses::cosine_sim_matrix(z);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(std::fabs(s.at(i, i) - 1.0) < 1e-12);
    for (std::size_t j = 0; j < 7; ++j) {
      CHECK(s.at(i, j) == doctest::Approx(s.at(j, i)).epsilon(1e-12));
      CHECK(s.at(i, j) >= -1.0 - 1e-12);
      CHECK(s.at(i, j) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("nt_xent degenerate and frozen cases") {
  Rng rng(5);
  // n = 1: no negatives, identically zero.
  Tensor a = matrix_from(random_rows(rng, 1, 6));
  Tensor b = matrix_from(random_rows(rng, 1, 6));
  CHECK(losses::nt_xent(a, b, 0.1).value() == 0.0);

  // n = 2, all four rows identical: every similarity is 1, so each pair
  // loss is log(2n - 1) = log 3.
  oracles::Matrix same(2, {0.3, -0.4, 1.2});
  Tensor z = matrix_from(same);
  CHECK(losses::nt_xent(z, z, 0.1).value() ==
        doctest::Approx(std::log(3.0)).epsilon(1e-9));

  CHECK_THROWS_AS(losses::nt_xent(a, b, 0.0), Error);
  CHECK_THROWS_AS(losses::nt_xent(a, b, -1.0), Error);
  CHECK_THROWS_AS(
      losses::nt_xent(a, matrix_from(random_rows(rng, 2, 6)), 0.1), Error);
}

TEST_CASE("nt_xent matches the brute-force oracle") {
  Rng rng(7);
  const std::size_t sizes[] = {1, 2, 3, 4, 8};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = sizes[trial % 5];
    const std::size_t d = 2 + rng.uniform_index(6);
    const double tau = rng.uniform(0.05, 1.0);
    oracles::Matrix z1 = random_rows(rng, n, d);
    oracles::Matrix z2 = random_rows(rng, n, d);
    const double expected = oracles::nt_xent(z1, z2, tau);
    const double got =
        losses::nt_xent(matrix_from(z1), matrix_from(z2), tau).value();
    if (n == 1) {
      CHECK(got == 0.0);
      CHECK(std::fabs(expected) < 1e-10);
    } else {
      CHECK(std::fabs(got - expected) < 1e-10);
    }
  }
}

TEST_CASE("nt_xent per-pair losses are non-negative") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(6);
    oracles::Matrix z1 = random_rows(rng, n, 4);
    oracles::Matrix z2 = random_rows(rng, n, 4);
    for (double pair_loss :
         oracles::nt_xent_pair_losses(z1, z2, rng.uniform(0.05, 1.0))) {
      CHECK(pair_loss >= -1e-12);
    }
  }
}

TEST_CASE("nt_xent invariances: joint permutation and positive rescale") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(5);
    const std::size_t d = 4;
    oracles::Matrix z1 = random_rows(rng, n, d);
    oracles::Matrix z2 = random_rows(rng, n, d);
    const double tau = 0.1;
    const double base =
        losses::nt_xent(matrix_from(z1), matrix_from(z2), tau).value();

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    oracles::Matrix p1(n), p2(n);
    for (std::size_t i = 0; i < n; ++i) {
      p1[i] = z1[perm[i]];
      p2[i] = z2[perm[i]];
    }
    const double permuted =
        losses::nt_xent(matrix_from(p1), matrix_from(p2), tau).value();
    CHECK(std::fabs(permuted - base) < 1e-10);

    const double scale = rng.uniform(0.1, 10.0);
    oracles::Matrix s1 = z1, s2 = z2;
    for (auto& row : s1)
      for (double& v : row) v *= scale;
    for (auto& row : s2)
      for (double& v : row) v *= scale;
    const double rescaled =
        losses::nt_xent(matrix_from(s1), matrix_from(s2), tau).value();
    CHECK(std::fabs(rescaled - base) < 1e-10);
  }
}

TEST_CASE("divergence loss frozen and degenerate cases") {
  // n = 1: denominator equals the positive term.
  CHECK(losses::divergence_loss(Tensor::from_data({1, 1}, {0.7})).value() ==
        0.0);

  // Uniform matrix: softmax is uniform, loss = log n.
  Tensor uniform = Tensor::full({4, 4}, 0.37);
  CHECK(losses::divergence_loss(uniform).value() ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(losses::divergence_loss(uniform).value() ==
        doctest::Approx(1.38629).epsilon(1e-4));

  CHECK_THROWS_AS(losses::divergence_loss(Tensor::from_data({2, 3},
                                                            {1, 2, 3, 4, 5, 6})),
                  Error);
  CHECK_THROWS_AS(losses::divergence_loss(uniform, 0.0), Error);
}

TEST_CASE("divergence loss matches the brute-force oracle") {
  Rng rng(17);
  const std::size_t sizes[] = {1, 2, 3, 4, 8};
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = sizes[trial % 5];
    oracles::Matrix psi(n, std::vector<double>(n));
    for (auto& row : psi)
      for (double& v : row) v = rng.uniform(0.0, 1.0);
    std::vector<double> flat;
    for (auto& row : psi) flat.insert(flat.end(), row.begin(), row.end());
    const double got =
        losses::divergence_loss(Tensor::from_data({n, n}, flat)).value();
    const double expected = oracles::divergence_loss(psi);
    if (n == 1) {
      CHECK(got == 0.0);
      CHECK(std::fabs(expected) < 1e-10);
    } else {
      CHECK(std::fabs(got - expected) < 1e-10);
    }
  }
}

TEST_CASE("divergence temperature divides the logits") {
  Rng rng(19);
  oracles::Matrix psi(3, std::vector<double>(3));
  for (auto& row : psi)
    for (double& v : row) v = rng.uniform(0.0, 1.0);
  oracles::Matrix scaled = psi;
  for (auto& row : scaled)
    for (double& v : row) v /= 0.25;
  std::vector<double> flat;
  for (auto& row : psi) flat.insert(flat.end(), row.begin(), row.end());
  const double with_temp =
      losses::divergence_loss(Tensor::from_data({3, 3}, flat), 0.25).value();
  CHECK(std::fabs(with_temp - oracles::divergence_loss(scaled)) < 1e-10);
}

TEST_CASE("divergence loss falls to zero as the diagonal margin grows") {
  // Diagonal fixed at 1, off-diagonal shrinking toward -inf equivalent:
  // psi scaled down off-diagonal => loss decreases monotonically to 0.
  double previous = -1.0;
  for (int k = 0; k < 12; ++k) {
    const double off = 1.0 - static_cast<double>(k + 1) * 2.0;
    std::vector<double> values(9, off);
    values[0] = values[4] = values[8] = 1.0;
    const double loss =
        losses::divergence_loss(Tensor::from_data({3, 3}, values)).value();
    if (k > 0) CHECK(loss < previous);
    previous = loss;
  }
  CHECK(previous < 1e-8);
}

TEST_CASE("total_loss adds exactly") {
  auto breakdown = losses::total_loss(1.5, 0.25);
  CHECK(breakdown.total == 1.75);
  CHECK(losses::total_loss(0.0, 0.0).total == 0.0);
  CHECK_THROWS_AS(losses::total_loss(std::nan(""), 0.0), Error);

  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const double a = rng.normal() * 10;
    const double b = rng.normal() * 10;
    CHECK(losses::total_loss(a, b).total == a + b);
  }
}

TEST_CASE("kernel values: frozen points") {
  SimilarityKernel gaussian{KernelKind::Gaussian, 0.9, 1.0};
  CHECK(losses::kernel_value(gaussian, 0.0) == 1.0);  // exactly
  CHECK(losses::kernel_value(gaussian, 1.62) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(losses::kernel_value(gaussian, 1.62) ==
        doctest::Approx(0.36788).epsilon(1e-4));

  SimilarityKernel inverse{KernelKind::Inverse};
  CHECK(losses::kernel_value(inverse, 1.0) == 0.5);

  SimilarityKernel bad{KernelKind::Gaussian, 0.0, 1.0};
  CHECK_THROWS_AS(losses::kernel_value(bad, 1.0), Error);
  SimilarityKernel bad_alpha{KernelKind::Arccot, 0.9, 0.0};
  CHECK_THROWS_AS(losses::kernel_value(bad_alpha, 1.0), Error);
}

TEST_CASE("every kernel kind is order-reversing") {
  Rng rng(29);
  const KernelKind kinds[] = {KernelKind::Gaussian, KernelKind::Inverse,
                              KernelKind::SqrtComplement,
                              KernelKind::MaxNormalized, KernelKind::Arccot};
  for (KernelKind kind : kinds) {
    SimilarityKernel kernel{kind, 0.9, 1.7};
    for (int t = 0; t < 1000; ++t) {
      const double hi_limit = kind == KernelKind::SqrtComplement ? 1.0 : 8.0;
      double d1 = rng.uniform(0.0, hi_limit);
      double d2 = rng.uniform(0.0, hi_limit);
      if (d1 == d2) continue;
      if (d1 > d2) std::swap(d1, d2);
      const double matrix_max = hi_limit;  // fixed reference for max-normalized
      CHECK(losses::kernel_value(kernel, d1, matrix_max) >
            losses::kernel_value(kernel, d2, matrix_max) - 1e-12);
    }
  }
}

TEST_CASE("apply_kernel matches kernel_value elementwise") {
  Rng rng(31);
  std::vector<double> values(9);
  for (double& v : values) v = rng.uniform(0.0, 3.0);
  Tensor d = Tensor::from_data({3, 3}, values);
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, v);

  const KernelKind kinds[] = {KernelKind::Gaussian, KernelKind::Inverse,
                              KernelKind::MaxNormalized, KernelKind::Arccot};
  for (KernelKind kind : kinds) {
    SimilarityKernel kernel{kind, 0.9, 1.7};
    Tensor psi = losses::apply_kernel(kernel, d);
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(psi.data()[i] ==
            doctest::Approx(losses::kernel_value(kernel, values[i], peak))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("apply_kernel domain handling") {
  SimilarityKernel sqrtc{KernelKind::SqrtComplement};
  CHECK_THROWS_AS(
      losses::apply_kernel(sqrtc, Tensor::from_data({1, 2}, {0.5, 1.5})),
      Error);
  Tensor ok = losses::apply_kernel(sqrtc, Tensor::from_data({1, 2}, {0.0, 0.75}));
  CHECK(ok.data()[0] == 1.0);
  CHECK(ok.data()[1] == 0.5);

  // All-zero divergences: max-normalized defines psi == 1.
  SimilarityKernel maxn{KernelKind::MaxNormalized};
  Tensor flat = losses::apply_kernel(maxn, Tensor::zeros({2, 2}));
  for (double v : flat.data()) CHECK(v == 1.0);
}

TEST_CASE("nt_xent gradients are exact over repeated random draws") {
  Rng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    ParamGraph params;
    const std::size_t n = 2 + rng.uniform_index(4), d = 3 + rng.uniform_index(5);
    auto add_matrix = [&](const char* name) {
      std::vector<double> v(n * d);
      for (double& x : v) x = rng.normal();
      return params.add(name, Tensor::from_data({n, d}, std::move(v)));
    };
    Tensor z1 = add_matrix("z1");
    Tensor z2 = add_matrix("z2");
    auto f = [&]() { return losses::nt_xent(z1, z2, 0.1); };
    GradCheckReport report = grad_check(f, params, 1e-5, 1e-4);
    INFO("trial ", trial, " max rel error ", report.max_rel_error);
    CHECK(report.passed());
  }
}

TEST_CASE("kernel + divergence-loss gradients are exact on subnet scores") {
  Rng rng(41);
  SimilarityKernel gaussian{KernelKind::Gaussian, 0.9, 1.0};
  for (int trial = 0; trial < 10; ++trial) {
    ParamGraph params;
    const std::size_t n = 3, kappa = 4;
    auto add_matrix = [&](const char* name) {
      std::vector<double> v(n * kappa);
      for (double& x : v) x = rng.normal();
      return params.add(name, Tensor::from_data({n, kappa}, std::move(v)));
    };
    Tensor o1 = add_matrix("o1");
    Tensor o2 = add_matrix("o2");
    auto f = [&]() {
      Tensor div = bregman::deep_divergence(o1, o2);
      return losses::divergence_loss(losses::apply_kernel(gaussian, div));
    };
    GradCheckReport report = grad_check(f, params, 1e-5, 1e-4);
    INFO("trial ", trial, " max rel error ", report.max_rel_error);
    CHECK(report.passed());
  }
}
