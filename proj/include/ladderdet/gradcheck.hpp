#pragma once

#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ladderdet/net.hpp"

// Central-difference verification of analytic gradients. Runs at 64-bit
// precision; the step of 1e-5 balances truncation against cancellation.

namespace ladderdet {

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    int checked = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;

    double max_rel_err() const {
        double m = 0.0;
        for (const auto& e : entries) m = std::max(m, e.max_rel_err);
        return m;
    }
    bool within(double tol) const { return max_rel_err() <= tol; }
};

/// Compare analytic gradients against central differences of loss_fn.
/// loss_fn re-evaluates the loss from the buffers' current contents. When
/// max_samples_per_buffer >= 0 a random index subset per buffer is checked.
inline GradCheckReport grad_check(const std::function<double()>& loss_fn,
                                  const std::vector<ParamView<double>>& buffers,
                                  const std::vector<ParamView<const double>>& analytic,
                                  double step = 1e-5, int max_samples_per_buffer = -1,
                                  std::uint64_t seed = 0) {
    if (buffers.size() != analytic.size())
        throw std::invalid_argument("grad_check: buffer/gradient count mismatch");
    std::mt19937_64 rng(seed);
    GradCheckReport report;
    for (size_t b = 0; b < buffers.size(); ++b) {
        const auto& pv = buffers[b];
        const auto& gv = analytic[b];
        if (pv.size != gv.size)
            throw std::invalid_argument("grad_check: size mismatch in " + pv.name);
        std::vector<size_t> indices;
        if (max_samples_per_buffer < 0 || static_cast<size_t>(max_samples_per_buffer) >= pv.size) {
            indices.resize(pv.size);
            for (size_t i = 0; i < pv.size; ++i) indices[i] = i;
        } else {
            std::uniform_int_distribution<size_t> dist(0, pv.size - 1);
            for (int i = 0; i < max_samples_per_buffer; ++i) indices.push_back(dist(rng));
        }
        GradCheckEntry entry{pv.name, 0.0, static_cast<int>(indices.size())};
        for (size_t idx : indices) {
            const double saved = pv.data[idx];
            pv.data[idx] = saved + step;
            const double plus = loss_fn();
            pv.data[idx] = saved - step;
            const double minus = loss_fn();
            pv.data[idx] = saved;
            const double numeric = (plus - minus) / (2.0 * step);
            const double a = gv.data[idx];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-3});
            entry.max_rel_err = std::max(entry.max_rel_err, std::abs(a - numeric) / denom);
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

/// Whole-network check of d(l2_loss)/d(params) on one batch.
inline GradCheckReport grad_check_network(const NetConfig& cfg, NetParams<double>& params,
                                          const Tensor4<double>& batch,
                                          const Tensor4<double>& targets, double step = 1e-5,
                                          int max_samples_per_buffer = -1,
                                          std::uint64_t seed = 0) {
    ForwardCache<double> cache;
    Tensor4<double> pred = net_forward(cfg, params, batch, RunMode::train, &cache);
    Tensor4<double> grad_loss;
    l2_loss(pred, targets, &grad_loss);
    NetGrads<double> grads = net_backward(cfg, params, cache, grad_loss);

    auto loss_fn = [&]() {
        Tensor4<double> p = net_forward(cfg, params, batch, RunMode::train,
                                        static_cast<ForwardCache<double>*>(nullptr));
        return l2_loss(p, targets, static_cast<Tensor4<double>*>(nullptr));
    };
    return grad_check(loss_fn, collect_trainables<double>(params),
                      collect_trainables<const double>(grads), step, max_samples_per_buffer,
                      seed);
}

} // namespace ladderdet
