#pragma once

// Helpers shared between translation units of the library; not installed.

#include <string>

#include "sea/dynamics.hpp"

namespace sea::detail {

long double dot_extended(const Vector& a, const Vector& b);
std::string label_of(const GradientVectors& grads, Index i);
void check_gram_condition(const Matrix& a, const GradientVectors& grads);
Vector affinity_extended(const Vector& phi, const Matrix& psi,
                         const Vector& beta, double k_b);
// Fills tau, pi_gamma, speed and entropy production from lambda and dod.
void finish_solution(SeaSolution& sol, const MetricForm& form,
                     const TauPolicy& tau, const Vector& gamma,
                     const Vector& g_inv_lambda);

}  // namespace sea::detail
