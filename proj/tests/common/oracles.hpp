#pragma once

// Reference computations written as plain loops over doubles. They share no
// code with the library and serve as test oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace v2v::oracle {

inline double log_sigmoid(double x) {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// mean log s(real) + mean log(1 - s(fake)), s the logistic function.
inline double log_adversarial(const std::vector<double>& real, const std::vector<double>& fake) {
    double a = 0, b = 0;
    for (double r : real) {
        a += log_sigmoid(r);
    }
    for (double f : fake) {
        b += log_sigmoid(-f);
    }
    return a / static_cast<double>(real.size()) + b / static_cast<double>(fake.size());
}

inline double least_squares_adversarial(const std::vector<double>& real, const std::vector<double>& fake) {
    double a = 0, b = 0;
    for (double r : real) {
        a += (r - 1) * (r - 1);
    }
    for (double f : fake) {
        b += f * f;
    }
    return -(a / static_cast<double>(real.size()) + b / static_cast<double>(fake.size()));
}

inline double cycle(const std::vector<double>& x, const std::vector<double>& xc, const std::vector<double>& y,
                    const std::vector<double>& yc) {
    double a = 0, b = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        a += std::abs(xc[i] - x[i]);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        b += std::abs(yc[i] - y[i]);
    }
    return a / static_cast<double>(x.size()) + b / static_cast<double>(y.size());
}

/// frames laid out [m][c][h][w]; mean squared difference of consecutive frames.
inline double constancy(const std::vector<double>& f, int m, int c, int h, int w, bool normalized = true) {
    double s = 0;
    const int per = c * h * w;
    for (int t = 1; t < m; ++t) {
        for (int ch = 0; ch < c; ++ch) {
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    const int k = (ch * h + i) * w + j;
                    const double d = f[t * per + k] - f[(t - 1) * per + k];
                    s += d * d;
                }
            }
        }
    }
    return normalized ? s / (static_cast<double>(m - 1) * per) : s / c;
}

/// Row-stochastic transition counts; rows of absent classes are identity rows.
inline std::vector<double> transitions(const std::vector<std::uint16_t>& labels, int d, int h, int w, int k) {
    std::vector<double> p(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        double row = 0;
        std::vector<double> cnt(k, 0.0);
        for (int t = 0; t + 1 < d; ++t) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (labels[(t * h + y) * w + x] == i) {
                        cnt[labels[((t + 1) * h + y) * w + x]] += 1;
                        row += 1;
                    }
                }
            }
        }
        for (int j = 0; j < k; ++j) {
            p[i * k + j] = row == 0 ? (i == j ? 1.0 : 0.0) : cnt[j] / row;
        }
    }
    return p;
}

// Closed-form parameter totals: weight plus bias per convolution, no affine
// normalisation parameters.
inline std::int64_t conv_params(std::int64_t in, std::int64_t out, std::int64_t k, int rank) {
    return in * out * (rank == 2 ? k * k : k * k * k) + out;
}

inline std::int64_t generator_params(int rank, std::int64_t c, std::int64_t o, std::int64_t nf, std::int64_t blocks) {
    return conv_params(c, nf, 7, rank) + conv_params(nf, 2 * nf, 3, rank) + conv_params(2 * nf, 4 * nf, 3, rank) +
           blocks * 2 * conv_params(4 * nf, 4 * nf, 3, rank) + conv_params(4 * nf, 2 * nf, 3, rank) +
           conv_params(2 * nf, nf, 3, rank) + conv_params(nf, o, 7, rank);
}

inline std::int64_t discriminator_params(int rank, std::int64_t c, std::int64_t nf, int n) {
    std::int64_t total = conv_params(c, nf, 4, rank);
    std::int64_t prev = nf;
    for (int i = 1; i <= n; ++i) {
        const std::int64_t cur = nf * std::min<std::int64_t>(std::int64_t{1} << i, 8);
        total += conv_params(prev, cur, 4, rank);
        prev = cur;
    }
    return total + conv_params(prev, 1, 4, rank);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return saa == 0 || sbb == 0 ? 0.0 : sab / std::sqrt(saa * sbb);
}

}  // namespace v2v::oracle
