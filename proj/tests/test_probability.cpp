#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "airgam/probability.hpp"
#include "airgam/rng.hpp"

using namespace airgam;

namespace {

// High-precision chi-squared survival oracle from closed forms:
// S_1(x) = erfc(sqrt(x/2)), S_2(x) = exp(-x/2), and the recurrence
// S_{v+2}(x) = S_v(x) + (x/2)^{v/2} exp(-x/2) / Gamma(v/2 + 1),
// evaluated in long double.
long double chi2_sf_oracle(double x, int dof) {
    const long double half_x = static_cast<long double>(x) / 2.0L;
    long double sf;
    int v;
    if (dof % 2 == 0) {
        sf = expl(-half_x);
        v = 2;
    } else {
        sf = erfcl(sqrtl(half_x));
        v = 1;
    }
    while (v < dof) {
        const long double term =
            powl(half_x, static_cast<long double>(v) / 2.0L) * expl(-half_x) /
            tgammal(static_cast<long double>(v) / 2.0L + 1.0L);
        sf += term;
        v += 2;
    }
    return sf;
}

}  // namespace

TEST_SUITE("probability") {

TEST_CASE("log_gamma matches factorials and half-integers") {
    CHECK(log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-14));
    CHECK(log_gamma(12.0) == doctest::Approx(std::log(39916800.0)).epsilon(1e-14));
    CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-14));
    CHECK(log_gamma(2.5) ==
          doctest::Approx(std::log(1.5 * 0.5 * std::sqrt(M_PI))).epsilon(1e-14));
}

TEST_CASE("chi-squared tail matches the closed-form oracle to 1e-10 relative") {
    const std::vector<int> dofs = {1, 2, 3, 4, 5, 7, 10, 25, 50};
    const std::vector<double> xs = {0.05, 0.3, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0, 80.0, 150.0};
    for (int dof : dofs) {
        for (double x : xs) {
            const long double oracle = chi2_sf_oracle(x, dof);
            if (oracle < 1e-250L) continue;
            const double got = chi_squared_sf(x, dof);
            const double rel = std::fabs(got - static_cast<double>(oracle)) /
                               static_cast<double>(oracle);
            INFO("dof=", dof, " x=", x, " got=", got, " oracle=", static_cast<double>(oracle));
            CHECK(rel < 1e-10);
        }
    }
}

TEST_CASE("chi-squared tail edge behaviour") {
    CHECK(chi_squared_sf(0.0, 5.0) == 1.0);
    CHECK(chi_squared_sf(-3.0, 5.0) == 1.0);
    CHECK(chi_squared_sf(1e4, 5.0) < 1e-100);
    CHECK_THROWS_AS(chi_squared_sf(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("chi-squared p-values are monotone decreasing in the statistic") {
    double prev = 1.0;
    for (double q = 0.0; q < 60.0; q += 0.7) {
        const double p = chi_squared_sf(q, 25.0);
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("student t two-sided p matches closed forms at df 1 and 2") {
    for (double t : {0.1, 0.7, 1.5, 3.0, 10.0}) {
        const double p1 = 1.0 - 2.0 / M_PI * std::atan(t);
        CHECK(student_t_two_sided_p(t, 1.0) == doctest::Approx(p1).epsilon(1e-12));
        const double p2 = 1.0 - t / std::sqrt(t * t + 2.0);
        CHECK(student_t_two_sided_p(t, 2.0) == doctest::Approx(p2).epsilon(1e-12));
        CHECK(student_t_two_sided_p(-t, 1.0) == doctest::Approx(p1).epsilon(1e-12));
    }
    // Large df approaches the normal.
    const double p_norm = 2.0 * (1.0 - normal_cdf(1.96));
    CHECK(student_t_two_sided_p(1.96, 1e6) == doctest::Approx(p_norm).epsilon(1e-4));
}

TEST_CASE("normal quantile round-trips the cdf") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-6}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-11));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("incomplete gamma endpoints") {
    CHECK(regularized_gamma_p(3.0, 0.0) == 0.0);
    CHECK(regularized_gamma_q(3.0, 0.0) == 1.0);
    CHECK(regularized_gamma_p(1.0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
}

}  // TEST_SUITE

TEST_SUITE("rng") {

TEST_CASE("streams are deterministic and substreams differ") {
    Rng a(1234), b(1234), c(1235);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const double ua = a.uniform();
        all_equal &= (ua == b.uniform());
        any_diff |= (ua != c.uniform());
    }
    CHECK(all_equal);
    CHECK(any_diff);

    Rng s1 = Rng::substream(42, 0);
    Rng s2 = Rng::substream(42, 1);
    Rng s1again = Rng::substream(42, 0);
    CHECK(s1.uniform() != s2.uniform());
    Rng s1b = Rng::substream(42, 0);
    CHECK(s1again.uniform() == s1b.uniform());
}

TEST_CASE("normal draws have the right first two moments") {
    Rng rng(7);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("poisson draws match mean and variance across regimes") {
    Rng rng(11);
    for (double mu : {0.5, 3.0, 25.0, 400.0}) {
        const int n = 100000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = static_cast<double>(rng.poisson(mu));
            sum += y;
            sum_sq += y * y;
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        INFO("mu=", mu);
        CHECK(mean == doctest::Approx(mu).epsilon(0.02));
        CHECK(var == doctest::Approx(mu).epsilon(0.05));
    }
}

TEST_CASE("gamma draws match mean and variance") {
    Rng rng(13);
    for (double shape : {0.5, 2.0, 9.0}) {
        const double scale = 1.7;
        const int n = 100000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = rng.gamma(shape, scale);
            sum += g;
            sum_sq += g * g;
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        INFO("shape=", shape);
        CHECK(mean == doctest::Approx(shape * scale).epsilon(0.03));
        CHECK(var == doctest::Approx(shape * scale * scale).epsilon(0.08));
    }
}

TEST_CASE("overdispersed counts hit Var = phi * mean") {
    Rng rng(17);
    const double mu = 100.0;
    for (double phi : {1.0, 3.0, 5.0}) {
        const int n = 100000;
        double sum = 0.0, sum_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double y = static_cast<double>(rng.count_with_dispersion(mu, phi));
            sum += y;
            sum_sq += y * y;
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        INFO("phi=", phi);
        CHECK(mean == doctest::Approx(mu).epsilon(0.02));
        CHECK(var == doctest::Approx(phi * mu).epsilon(0.05));
    }
}

}  // TEST_SUITE
