#include "orbitstream/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "orbitstream/channel.hpp"

namespace orbitstream {

AbrDecision buffer_based_decide(const AbrObservation& obs, const QualityLadder& ladder, double reservoir,
                                double cushion) {
    if (!(cushion > 0.0)) throw std::invalid_argument("buffer_based_decide: cushion must be positive");
    if (obs.buffer <= reservoir) return {0, std::nullopt};
    if (obs.buffer >= reservoir + cushion) return {ladder.top(), std::nullopt};
    const double lo = ladder.tier(0);
    const double hi = ladder.tier(ladder.top());
    const double rate = lo + (obs.buffer - reservoir) / cushion * (hi - lo);
    return {ladder.floor_tier(rate), std::nullopt};
}

namespace {

std::vector<double> last_throughputs(const AbrObservation& obs, int window) {
    const auto& h = obs.throughput_history;
    const auto n = std::min<std::size_t>(h.size(), static_cast<std::size_t>(std::max(window, 0)));
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = h.size() - n; i < h.size(); ++i) out.push_back(h[i].mbps);
    return out;
}

}  // namespace

AbrDecision rate_based_decide(const AbrObservation& obs, const QualityLadder& ladder, int window) {
    if (window < 1) throw std::invalid_argument("rate_based_decide: window must be >= 1");
    const auto recent = last_throughputs(obs, window);
    if (recent.empty()) return {0, std::nullopt};
    return {ladder.floor_tier(harmonic_mean(recent)), std::nullopt};
}

BolaParams derive_bola_params(const QualityLadder& ladder, double b_low, double b_high) {
    if (ladder.levels() < 2) return {b_high, 0.0};
    if (!(b_high > b_low && b_low > 0.0)) throw std::invalid_argument("derive_bola_params: need 0 < b_low < b_high");
    const double r0 = ladder.tier(0);
    auto utility = [&](int q) { return std::log(ladder.tier(q) / r0); };
    // The switch point between tiers a < b sits at buffer V (k_ab + gamma_p).
    auto k = [&](int a, int b) {
        return (ladder.tier(b) * utility(a) - ladder.tier(a) * utility(b)) / (ladder.tier(b) - ladder.tier(a));
    };
    const double k_low = k(0, 1);
    const double k_top = k(ladder.top() - 1, ladder.top());
    const double ratio = b_high / b_low;
    const double gamma_p = (k_top - ratio * k_low) / (ratio - 1.0);
    return {b_low / (k_low + gamma_p), gamma_p};
}

AbrDecision bola_decide(const AbrObservation& obs, const QualityLadder& ladder, const BolaParams& params) {
    if (!(params.v > 0.0)) throw std::invalid_argument("bola_decide: V must be positive");
    const double r0 = ladder.tier(0);
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < ladder.levels(); ++q) {
        const double score = (params.v * (std::log(ladder.tier(q) / r0) + params.gamma_p) - obs.buffer) / ladder.tier(q);
        if (score >= best_score) {
            best_score = score;
            best = q;
        }
    }
    return {best, std::nullopt};
}

void MpcParams::validate() const {
    if (horizon < 1 || horizon > 8) throw std::invalid_argument("mpc: horizon must lie in [1, 8]");
    if (window < 1) throw std::invalid_argument("mpc: window must be >= 1");
    if (!(segment > 0.0)) throw std::invalid_argument("mpc: segment must be positive");
}

double mpc_predicted_throughput(const AbrObservation& obs, const MpcParams& params) {
    const auto& h = obs.throughput_history;
    if (h.empty()) return 0.0;
    switch (params.variant) {
        case MpcParams::Variant::last:
            return h.back().mbps;
        case MpcParams::Variant::fast:
            return harmonic_mean(last_throughputs(obs, params.window));
        case MpcParams::Variant::robust: {
            // Relative error of the harmonic-mean predictor over the recent chunks, each judged
            // against what it would have predicted from the samples before it.
            double max_err = 0.0;
            const auto n = h.size();
            const auto first = n > static_cast<std::size_t>(params.window) ? n - static_cast<std::size_t>(params.window) : 1;
            for (std::size_t i = std::max<std::size_t>(first, 1); i < n; ++i) {
                const auto lo = i > static_cast<std::size_t>(params.window) ? i - static_cast<std::size_t>(params.window) : 0;
                std::vector<double> before;
                for (std::size_t j = lo; j < i; ++j) before.push_back(h[j].mbps);
                const double pred = harmonic_mean(before);
                max_err = std::max(max_err, std::abs(pred - h[i].mbps) / h[i].mbps);
            }
            return harmonic_mean(last_throughputs(obs, params.window)) / (1.0 + max_err);
        }
    }
    return 0.0;
}

AbrDecision mpc_decide(const AbrObservation& obs, const MpcParams& params, const QualityLadder& ladder) {
    params.validate();
    const double predicted = mpc_predicted_throughput(obs, params);
    if (!(predicted > 0.0)) return {0, std::nullopt};

    const int levels = ladder.levels();
    const int h = params.horizon;
    const auto& qp = params.qoe;
    std::vector<int> seq(static_cast<std::size_t>(h), 0);
    double best_score = -std::numeric_limits<double>::infinity();
    int best_first = 0;
    while (true) {
        double buffer = obs.buffer;
        double score = 0.0;
        int prev = obs.last_tier;
        for (int step = 0; step < h; ++step) {
            const int q = seq[static_cast<std::size_t>(step)];
            const double rate = ladder.tier(q);
            const double download = rate * params.segment / predicted;
            const double stall = std::max(0.0, download - buffer);
            buffer = std::max(buffer - download, 0.0) + params.segment;
            const double switch_cost = prev < 0 ? 0.0 : std::abs(rate - ladder.tier(prev));
            score += std::log(std::max(rate, qp.r_min) / qp.r_min) - qp.mu * stall - qp.lambda * switch_cost;
            prev = q;
        }
        if (score > best_score) {
            best_score = score;
            best_first = seq[0];
        }
        // Next sequence in lexicographic order, first tier most significant.
        int pos = h - 1;
        while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == levels - 1) {
            seq[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++seq[static_cast<std::size_t>(pos)];
    }
    return {best_first, std::nullopt};
}

ExtrapolatedViewport extrapolate_viewport(std::span<const GazeSample> history, double lookahead, const TileGrid& grid,
                                          double fov, const ExtrapolationParams& params) {
    ExtrapolatedViewport out;
    if (history.empty()) {
        out.center = SphericalCoord{};
    } else if (history.size() < 2) {
        out.center = history.back().at;
    } else {
        const double t_last = history.back().t;
        std::vector<double> ts;
        std::vector<double> thetas;
        std::vector<double> phis;
        double unwrapped = 0.0;
        bool first = true;
        double prev_theta = 0.0;
        for (const auto& s : history) {
            if (s.t < t_last - params.fit_window - 1e-9) continue;
            if (first) {
                unwrapped = s.at.theta();
                first = false;
            } else {
                unwrapped += wrap_angle(s.at.theta() - prev_theta);
            }
            prev_theta = s.at.theta();
            ts.push_back(s.t - t_last);
            thetas.push_back(unwrapped);
            phis.push_back(s.at.phi());
        }
        if (ts.size() < 2) {
            out.center = history.back().at;
        } else {
            const double mt = mean_of(ts);
            double stt = 0.0;
            for (double t : ts) stt += (t - mt) * (t - mt);
            auto fit_at = [&](const std::vector<double>& ys, double x) {
                const double my = mean_of(ys);
                double sty = 0.0;
                for (std::size_t i = 0; i < ts.size(); ++i) sty += (ts[i] - mt) * (ys[i] - my);
                const double slope = stt > 0.0 ? sty / stt : 0.0;
                return my + slope * (x - mt);
            };
            const double theta = fit_at(thetas, lookahead);
            const double phi = std::clamp(fit_at(phis, lookahead), -kHalfPi, kHalfPi);
            out.center = SphericalCoord(theta, phi);
        }
    }
    const auto tiles = viewport_tiles(out.center, fov, grid);
    const auto n = static_cast<std::size_t>(grid.size());
    out.probs.probs.assign(n, 0.0);
    const double inside = tiles.empty() ? 0.0 : (1.0 - params.uniform_mix) / static_cast<double>(tiles.size());
    const double base = tiles.empty() ? 1.0 / static_cast<double>(n) : params.uniform_mix / static_cast<double>(n);
    for (auto& p : out.probs.probs) p = base;
    for (int k : tiles) out.probs.probs[static_cast<std::size_t>(k)] += inside;
    return out;
}

}  // namespace orbitstream
