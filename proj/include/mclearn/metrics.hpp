#pragma once

#include <vector>

#include "mclearn/dtmc.hpp"

namespace mclearn {

// BIC-style score ln Pr_M(Pi) - mu * |M| * ln(n), where n is the total letter
// count of Pi.  Natural logs throughout; -inf when the model assigns some
// trace probability 0.  Larger is better.
double bic_score(const Dtmc& d, const TraceSet& pi, double mu = 0.5);

// Absolute relative deviation |est - act| / act.  NaN when act == 0 (the
// undefined-marker convention used in result tables).
double ard(double estimated, double actual);

// Mean squared error between two aligned vectors.
double mse_steady(const std::vector<double>& y_hat, const std::vector<double>& y);

// Mean squared error between steady-state distributions, aggregated by
// symbol: each model's stationary mass is summed per label name, aligned on
// the union of the two alphabets.
double mse_steady(const Dtmc& learned, const Dtmc& actual);

// Average per-observation prediction accuracy P_td^(1/|td|); 0 when the
// model assigns the trace probability 0.
double prediction_accuracy(const Dtmc& d, const Trace& td);

// Geometric per-step prediction accuracy of a test set: exp(ln Pr_M(Pi)/n)
// with n = total letters; 0 when any test trace has probability 0.
double prediction_accuracy(const Dtmc& d, const TraceSet& test);

} // namespace mclearn
