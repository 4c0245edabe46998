#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dealscope {

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

// Nearest-rank style quantile on a copy of v: index round(p * (n-1)),
// linear interpolation between neighbours (type-7, the R default).
double quantile(std::vector<double> v, double p);
double median(std::vector<double> v);

// Standard normal CDF via erfc, accurate in both tails.
double norm_cdf(double x);

// Acklam's rational approximation of the standard normal quantile,
// refined with one Halley step. |error| < 1e-12 over (0, 1).
double norm_inv(double p);

// Two-sided p-value for a standard-normal test statistic.
double wald_p_value(double z);

double sigmoid(double x);

// log(1 + exp(x)) without overflow.
double log1p_exp(double x);

// FNV-1a 64-bit over a byte buffer; used for file digests in manifests.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t value);

}  // namespace dealscope
