#pragma once

namespace affina {

// Regularized lower incomplete gamma P(a, x) via series / continued fraction.
double gamma_p(double a, double x);

// Chi-square CDF with k degrees of freedom.
double chi2_cdf(double x, int dof);

// Quantile (inverse CDF) by bisection on chi2_cdf; p in (0, 1).
double chi2_quantile(double p, int dof);

}  // namespace affina
