#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gmed {

// Regularized incomplete beta I_x(a,b) by Lentz continued fraction,
// accuracy ~1e-8; enough for 3-decimal p-values.
double incomplete_beta(double a, double b, double x);

// Survival function of Student's t with df degrees of freedom: P(T > t).
double student_t_sf(double t, double df);

// Survival function of the chi-squared distribution (upper regularized
// incomplete gamma).
double chi_squared_sf(double x, double df);

// One-sided paired t-test of mean(a - b) > 0, paired by index.
// sd = 0 conventions: positive mean -> 0, zero mean -> 0.5, negative -> 1.
double paired_t_test_one_sided(const std::vector<double>& a, const std::vector<double>& b);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // unbiased sample std; 0 for a single value
};

MeanStd mean_std(const std::vector<double>& v);

}  // namespace gmed
