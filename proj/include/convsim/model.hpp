#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "convsim/attribution.hpp"
#include "convsim/matrix.hpp"

namespace convsim {

struct Hyper {
    double learning_rate = 0.1;
    double l2 = 1e-4;
    int epochs = 20;
    int batch_size = 64;
    std::uint64_t seed = 0;
};

// Per-action linear scorer over feature vectors; row a scores action a.
struct PolicyModel {
    Matrix weights;  // P x (P+1)
    bool trained_on_empty = false;
};

enum class LabelEncoding {
    click_label,   // y = credit (0/1 click label), weight 1
    sales_credit,  // positive credit: y=1 w=credit; zero: y=0 w=1; negative: y=0 w=|credit|
};

struct EncodedExample {
    std::vector<double> x;
    double y = 0.0;
    double weight = 1.0;
};

std::vector<EncodedExample> encode_examples(std::span<const CreditedExample> examples,
                                            LabelEncoding encoding);

// Full-dataset objective for one weight row, minimization form:
//   -sum_i w_i [y_i log p_i + (1 - y_i) log(1 - p_i)] + l2/2 ||w||^2
double logistic_loss(std::span<const double> weights, std::span<const EncodedExample> examples,
                     double l2);
std::vector<double> logistic_grad(std::span<const double> weights,
                                  std::span<const EncodedExample> examples, double l2);

// Mini-batch gradient descent, one independent binary regression per action.
// Deterministic given seed and example order.
PolicyModel train_logistic(std::span<const CreditedExample> examples, int num_products,
                           LabelEncoding encoding, const Hyper& hyper);

}  // namespace convsim
