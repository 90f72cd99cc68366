#include "convsim/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "convsim/rng.hpp"

namespace convsim {

std::vector<EncodedExample> encode_examples(std::span<const CreditedExample> examples,
                                            LabelEncoding encoding) {
    std::vector<EncodedExample> out;
    out.reserve(examples.size());
    for (const CreditedExample& e : examples) {
        if (!std::isfinite(e.credit)) throw std::invalid_argument("credit: must be finite");
        EncodedExample enc{e.features, 0.0, 1.0};
        if (encoding == LabelEncoding::click_label) {
            enc.y = e.credit > 0.0 ? 1.0 : 0.0;
        } else if (e.credit > 0.0) {
            enc.y = 1.0;
            enc.weight = e.credit;
        } else if (e.credit < 0.0) {
            enc.y = 0.0;
            enc.weight = -e.credit;
        }
        out.push_back(std::move(enc));
    }
    return out;
}

namespace {

// stable -[y log p + (1-y) log(1-p)] for p = sigma(z)
double weighted_nll(double z, double y, double w) {
    double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return w * (softplus - y * z);
}

}  // namespace

double logistic_loss(std::span<const double> weights, std::span<const EncodedExample> examples,
                     double l2) {
    double loss = 0.0;
    for (const EncodedExample& e : examples)
        loss += weighted_nll(dot(weights, e.x), e.y, e.weight);
    double reg = 0.0;
    for (double w : weights) reg += w * w;
    return loss + 0.5 * l2 * reg;
}

std::vector<double> logistic_grad(std::span<const double> weights,
                                  std::span<const EncodedExample> examples, double l2) {
    std::vector<double> grad(weights.size(), 0.0);
    for (const EncodedExample& e : examples) {
        double p = sigmoid(dot(weights, e.x));
        double coef = e.weight * (p - e.y);
        for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += coef * e.x[j];
    }
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += l2 * weights[j];
    return grad;
}

PolicyModel train_logistic(std::span<const CreditedExample> examples, int num_products,
                           LabelEncoding encoding, const Hyper& hyper) {
    const int dim = num_products + 1;
    PolicyModel model{Matrix(num_products, dim), examples.empty()};
    if (examples.empty()) return model;  // zero weights, the L2 prior

    std::vector<std::vector<EncodedExample>> per_action(num_products);
    for (const CreditedExample& e : examples) {
        if (e.action < 0 || e.action >= num_products)
            throw std::invalid_argument("action: out of range");
        if (static_cast<int>(e.features.size()) != dim)
            throw std::invalid_argument("features: wrong dimension");
        per_action[e.action].push_back(encode_examples({&e, 1}, encoding)[0]);
    }

    RngStream shuffle_rng = substream(hyper.seed, 0, StreamTag::training);
    for (int a = 0; a < num_products; ++a) {
        auto& data = per_action[a];
        if (data.empty()) continue;
        auto w = model.weights.row(a);
        std::vector<std::size_t> order(data.size());
        std::iota(order.begin(), order.end(), 0);

        for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
            // Fisher-Yates on the visiting order
            for (std::size_t i = order.size(); i > 1; --i) {
                std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_int(static_cast<int>(i)));
                std::swap(order[i - 1], order[j]);
            }
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(hyper.batch_size)) {
                std::size_t stop = std::min(order.size(),
                                            start + static_cast<std::size_t>(hyper.batch_size));
                std::vector<double> grad(dim, 0.0);
                for (std::size_t k = start; k < stop; ++k) {
                    const EncodedExample& e = data[order[k]];
                    double p = sigmoid(dot(w, e.x));
                    double coef = e.weight * (p - e.y);
                    for (int j = 0; j < dim; ++j) grad[j] += coef * e.x[j];
                }
                double inv = 1.0 / static_cast<double>(stop - start);
                for (int j = 0; j < dim; ++j)
                    w[j] -= hyper.learning_rate * (grad[j] * inv + hyper.l2 * w[j]);
            }
        }
    }
    return model;
}

}  // namespace convsim
