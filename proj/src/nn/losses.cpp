#include "v2v/errors.hpp"
#include "v2v/training.hpp"

namespace v2v::train {

const char* to_string(AdversarialForm f) {
    return f == AdversarialForm::Log ? "log" : "least_squares";
}

AdversarialForm parse_adversarial_form(const std::string& s) {
    if (s == "log") {
        return AdversarialForm::Log;
    }
    if (s == "least_squares" || s == "lsgan" || s == "least-squares") {
        return AdversarialForm::LeastSquares;
    }
    throw ConfigError("unknown adversarial form '" + s + "' (log | least_squares)");
}

namespace {

void require_finite(const torch::Tensor& t, const char* what) {
    if (!torch::isfinite(t.detach()).all().item<bool>()) {
        throw NumericError(std::string(what) + ": non-finite input", -1);
    }
}

void require_same(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
    if (a.sizes() != b.sizes()) {
        throw DataError(std::string(what) + ": shape mismatch");
    }
}

}  // namespace

torch::Tensor adversarial_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                               AdversarialForm form) {
    require_finite(real_scores, "adversarial_loss");
    require_finite(fake_scores, "adversarial_loss");
    if (form == AdversarialForm::Log) {
        // log(1 - sigmoid(s)) == log sigmoid(-s), stable for large |s|.
        return torch::log_sigmoid(real_scores).mean() + torch::log_sigmoid(-fake_scores).mean();
    }
    return -((real_scores - 1.0).square().mean() + fake_scores.square().mean());
}

torch::Tensor generator_adversarial_loss(const torch::Tensor& fake_scores, AdversarialForm form) {
    if (form == AdversarialForm::Log) {
        return -torch::log_sigmoid(fake_scores).mean();
    }
    return (fake_scores - 1.0).square().mean();
}

torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_cycled, const torch::Tensor& y,
                         const torch::Tensor& y_cycled) {
    require_same(x, x_cycled, "cycle_loss");
    require_same(y, y_cycled, "cycle_loss");
    return (x_cycled - x).abs().mean() + (y_cycled - y).abs().mean();
}

torch::Tensor const_loss(const torch::Tensor& frames, bool normalized) {
    if (frames.dim() != 4) {
        throw DataError("const_loss expects [m, c, h, w] frames");
    }
    const auto m = frames.size(0);
    if (m < 2) {
        throw DataError("const_loss needs at least 2 frames, got " + std::to_string(m));
    }
    using torch::indexing::Slice;
    const auto diff = frames.index({Slice(1)}) - frames.index({Slice(0, m - 1)});
    const auto sq = diff.square();
    if (normalized) {
        return sq.mean();
    }
    return sq.sum() / static_cast<double>(frames.size(1));
}

double total_objective(const ObjectiveTerms& t, double gamma, double lambda) {
    double v = t.gan_ab + t.gan_ba + gamma * t.cycle;
    if (t.constancy) {
        v += lambda * *t.constancy;
    }
    if (!std::isfinite(v)) {
        throw NumericError("total_objective: non-finite value", -1);
    }
    return v;
}

}  // namespace v2v::train
