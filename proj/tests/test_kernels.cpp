#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "affsup/kernels.hpp"
#include "affsup/rng.hpp"

using namespace affsup;
namespace k = affsup::kernels;

namespace {

// Forces an implementation for the enclosing scope.
struct ImplGuard {
  k::Impl saved;
  explicit ImplGuard(k::Impl impl) : saved(k::active()) { k::set_impl(impl); }
  ~ImplGuard() { k::set_impl(saved); }
};

const std::vector<std::size_t> kSizes = {1, 2, 3, 7, 8, 9, 15, 16, 17,
                                         31, 32, 33, 100, 1000};

template <class T>
std::vector<T> random_vec(std::size_t n, RngStream& rng, double lo = -2.0,
                          double hi = 2.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return v;
}

}  // namespace

TEST_CASE("kernel dispatch reports a valid implementation") {
  CHECK((k::active() == k::Impl::Scalar || k::active() == k::Impl::Avx2));
  CHECK(std::string(k::name(k::Impl::Scalar)) == "scalar");
  CHECK(std::string(k::name(k::Impl::Avx2)) == "avx2");
}

TEST_CASE("scalar and avx2 kernels agree") {
  if (!k::avx2_supported()) {
    MESSAGE("avx2 not supported here; equivalence suite skipped");
    return;
  }
  RngStream rng(42);
  for (const std::size_t n : kSizes) {
    CAPTURE(n);
    const auto af = random_vec<float>(n, rng);
    const auto bf = random_vec<float>(n, rng);
    const auto ad = random_vec<double>(n, rng);
    const auto bd = random_vec<double>(n, rng);

    float dot_f, sum_f, max_f, l2_f;
    double dot_d, sum_d, max_d, l2_d;
    std::vector<float> axpy_f = bf, exp_f(n);
    std::vector<double> axpy_d = bd, exp_d(n);
    float exps_f;
    double exps_d;
    {
      ImplGuard g(k::Impl::Scalar);
      dot_f = k::dot(af.data(), bf.data(), n);
      dot_d = k::dot(ad.data(), bd.data(), n);
      sum_f = k::sum(af.data(), n);
      sum_d = k::sum(ad.data(), n);
      max_f = k::max_value(af.data(), n);
      max_d = k::max_value(ad.data(), n);
      l2_f = k::sq_l2(af.data(), bf.data(), n);
      l2_d = k::sq_l2(ad.data(), bd.data(), n);
      k::axpy(0.5f, af.data(), axpy_f.data(), n);
      k::axpy(0.5, ad.data(), axpy_d.data(), n);
      exps_f = k::exp_shift_sum(af.data(), 1.5f, exp_f.data(), n);
      exps_d = k::exp_shift_sum(ad.data(), 1.5, exp_d.data(), n);
    }
    {
      ImplGuard g(k::Impl::Avx2);
      CHECK(k::dot(af.data(), bf.data(), n) ==
            doctest::Approx(dot_f).epsilon(1e-5));
      CHECK(k::dot(ad.data(), bd.data(), n) ==
            doctest::Approx(dot_d).epsilon(1e-12));
      CHECK(k::sum(af.data(), n) == doctest::Approx(sum_f).epsilon(1e-5));
      CHECK(k::sum(ad.data(), n) == doctest::Approx(sum_d).epsilon(1e-12));
      CHECK(k::max_value(af.data(), n) == max_f);
      CHECK(k::max_value(ad.data(), n) == max_d);
      CHECK(k::sq_l2(af.data(), bf.data(), n) ==
            doctest::Approx(l2_f).epsilon(1e-5));
      CHECK(k::sq_l2(ad.data(), bd.data(), n) ==
            doctest::Approx(l2_d).epsilon(1e-12));
      std::vector<float> y_f = bf;
      std::vector<double> y_d = bd;
      k::axpy(0.5f, af.data(), y_f.data(), n);
      k::axpy(0.5, ad.data(), y_d.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(y_f[i] == doctest::Approx(axpy_f[i]).epsilon(1e-6));
        CHECK(y_d[i] == doctest::Approx(axpy_d[i]).epsilon(1e-14));
      }
      std::vector<float> e_f(n);
      std::vector<double> e_d(n);
      CHECK(k::exp_shift_sum(af.data(), 1.5f, e_f.data(), n) ==
            doctest::Approx(exps_f).epsilon(1e-5));
      CHECK(k::exp_shift_sum(ad.data(), 1.5, e_d.data(), n) ==
            doctest::Approx(exps_d).epsilon(1e-12));
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(e_f[i] == doctest::Approx(exp_f[i]).epsilon(1e-6));
        CHECK(e_d[i] == doctest::Approx(exp_d[i]).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("avx2 float exp matches libm over its safe range") {
  if (!k::avx2_supported()) return;
  ImplGuard g(k::Impl::Avx2);
  std::vector<float> in, out;
  for (float x = -80.0f; x <= 80.0f; x += 0.37f) in.push_back(x);
  out.resize(in.size());
  k::exp_shift_sum(in.data(), 0.0f, out.data(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const float want = std::exp(in[i]);
    CHECK(out[i] == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("matmul kernels agree across implementations") {
  if (!k::avx2_supported()) return;
  RngStream rng(7);
  for (const auto& [m, kk, n] :
       std::vector<std::array<std::size_t, 3>>{{1, 1, 1},
                                               {2, 3, 4},
                                               {5, 8, 9},
                                               {8, 16, 8},
                                               {13, 7, 17}}) {
    const auto a = random_vec<float>(m * kk, rng);
    const auto b = random_vec<float>(kk * n, rng);
    std::vector<float> c_s(m * n), c_v(m * n);
    {
      ImplGuard g(k::Impl::Scalar);
      k::matmul(a.data(), b.data(), c_s.data(), m, kk, n);
    }
    {
      ImplGuard g(k::Impl::Avx2);
      k::matmul(a.data(), b.data(), c_v.data(), m, kk, n);
    }
    for (std::size_t i = 0; i < m * n; ++i)
      CHECK(c_v[i] == doctest::Approx(c_s[i]).epsilon(1e-5));

    const auto ad = random_vec<double>(m * kk, rng);
    const auto bd = random_vec<double>(kk * n, rng);
    std::vector<double> d_s(m * n), d_v(m * n);
    {
      ImplGuard g(k::Impl::Scalar);
      k::matmul(ad.data(), bd.data(), d_s.data(), m, kk, n);
    }
    {
      ImplGuard g(k::Impl::Avx2);
      k::matmul(ad.data(), bd.data(), d_v.data(), m, kk, n);
    }
    for (std::size_t i = 0; i < m * n; ++i)
      CHECK(d_v[i] == doctest::Approx(d_s[i]).epsilon(1e-13));
  }
}

TEST_CASE("set_impl rejects avx2 where unsupported") {
  if (k::avx2_supported()) return;
  CHECK_THROWS_AS(k::set_impl(k::Impl::Avx2), ConfigError);
}
