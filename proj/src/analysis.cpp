#include "bistab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bistab/errors.hpp"

namespace bistab {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen = std::polar(1.0, angle);
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w{1.0, 0.0};
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<std::complex<double>> dft_naive(std::span<const std::complex<double>> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    const double base = -2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) {
            acc += x[j] * std::polar(1.0, base * static_cast<double>(k * j));
        }
        out[k] = acc;
    }
    return out;
}

double band_median(std::vector<double> values) {
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct Vertex {
    double a = 0.0;
    double s = 0.0;
    double f = 0.0;
};

}  // namespace

std::vector<std::complex<double>> dft(std::span<const std::complex<double>> series) {
    if (series.empty()) throw std::invalid_argument("dft: empty series");
    if (is_power_of_two(series.size())) {
        std::vector<std::complex<double>> a(series.begin(), series.end());
        fft_radix2(a);
        return a;
    }
    return dft_naive(series);
}

Spectrogram stft(std::span<const double> series, double sample_dt, int window_len, int hop) {
    if (window_len < 2) throw std::invalid_argument("stft: window_len must be at least 2");
    if (hop < 1 || hop > window_len) {
        throw std::invalid_argument("stft: hop must lie in [1, window_len]");
    }
    if (!(sample_dt > 0.0) || !std::isfinite(sample_dt)) {
        throw std::invalid_argument("stft: sample_dt must be positive");
    }
    if (series.size() < static_cast<std::size_t>(window_len)) {
        throw std::invalid_argument("stft: series shorter than one window");
    }

    const std::size_t w = static_cast<std::size_t>(window_len);
    std::vector<double> hann(w);
    for (std::size_t j = 0; j < w; ++j) {
        hann[j] = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(j) / static_cast<double>(w)));
    }

    Spectrogram out;
    const std::size_t n_freq = w / 2 + 1;
    out.freqs.resize(n_freq);
    for (std::size_t k = 0; k < n_freq; ++k) {
        out.freqs[k] = static_cast<double>(k) / (static_cast<double>(w) * sample_dt);
    }

    std::vector<std::complex<double>> section(w);
    for (std::size_t start = 0; start + w <= series.size();
         start += static_cast<std::size_t>(hop)) {
        double mean = 0.0;
        for (std::size_t j = 0; j < w; ++j) mean += series[start + j];
        mean /= static_cast<double>(w);
        for (std::size_t j = 0; j < w; ++j) {
            section[j] = {(series[start + j] - mean) * hann[j], 0.0};
        }
        const std::vector<std::complex<double>> bins = dft(section);
        out.times.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(w - 1)) *
                            sample_dt);
        std::vector<double> mags(n_freq);
        for (std::size_t k = 0; k < n_freq; ++k) mags[k] = std::abs(bins[k]);
        out.magnitude.push_back(std::move(mags));
    }
    return out;
}

std::vector<FrequencyPoint> dominant_frequency(const Spectrogram& spec, double f_lo,
                                               double f_hi) {
    if (spec.times.empty() || spec.freqs.empty()) {
        throw std::invalid_argument("dominant_frequency: empty spectrogram");
    }
    if (!(f_lo < f_hi)) throw std::invalid_argument("dominant_frequency: need f_lo < f_hi");
    std::size_t k_lo = spec.freqs.size(), k_hi = 0;
    for (std::size_t k = 0; k < spec.freqs.size(); ++k) {
        if (spec.freqs[k] >= f_lo && spec.freqs[k] <= f_hi) {
            k_lo = std::min(k_lo, k);
            k_hi = std::max(k_hi, k);
        }
    }
    if (k_lo > k_hi) {
        throw std::invalid_argument("dominant_frequency: band contains no frequency bin");
    }

    std::vector<FrequencyPoint> out;
    out.reserve(spec.times.size());
    std::vector<double> band(k_hi - k_lo + 1);
    for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
        const std::vector<double>& mags = spec.magnitude[ti];
        std::size_t peak_k = k_lo;
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            band[k - k_lo] = mags[k];
            if (mags[k] > mags[peak_k]) peak_k = k;
        }
        const double peak = mags[peak_k];
        const double median = band_median(band);
        FrequencyPoint pt;
        pt.time = spec.times[ti];
        if (peak > 0.0 && peak >= 5.0 * median) {
            pt.frequency = spec.freqs[peak_k];
        }
        out.push_back(pt);
    }
    return out;
}

ScanTrace average_trace(const ScanTrace& trace, int window) {
    const std::size_t n = trace.samples.size();
    if (window < 1 || window % 2 == 0) {
        throw std::invalid_argument("average_trace: window must be odd and positive");
    }
    if (static_cast<std::size_t>(window) > n) {
        throw std::invalid_argument("average_trace: window larger than trace");
    }
    ScanTrace out;
    out.direction = trace.direction;
    out.samples.resize(n);
    const std::size_t half = static_cast<std::size_t>(window / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        double acc = 0.0;
        for (std::size_t j = i - h; j <= i + h; ++j) acc += trace.samples[j].intensity;
        out.samples[i].detuning = trace.samples[i].detuning;
        out.samples[i].intensity = acc / static_cast<double>(2 * h + 1);
    }
    return out;
}

namespace {

std::vector<double> grid_of(const ScanTrace& trace) {
    std::vector<double> grid;
    grid.reserve(trace.samples.size());
    for (const ScanSample& s : trace.samples) grid.push_back(s.detuning);
    return grid;
}

void accumulate_trace(const ScanTrace& model, const ScanTrace& measured, double& obj,
                      double& wsum) {
    const std::size_t n = model.samples.size();
    std::vector<double> weight(n, 1.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        if (std::abs(model.samples[j + 1].intensity - model.samples[j].intensity) > 0.1) {
            const std::size_t lo = j >= 1 ? j - 1 : 0;
            const std::size_t hi = std::min(n - 1, j + 2);
            for (std::size_t i = lo; i <= hi; ++i) weight[i] = 0.25;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double r = model.samples[i].intensity - measured.samples[i].intensity;
        obj += weight[i] * r * r;
        wsum += weight[i];
    }
}

}  // namespace

std::pair<double, double> fit_objective(const ScanTrace& up, const ScanTrace& down, double a,
                                        double s, ShiftSign sign, const PhysicalParams& p) {
    const ModelParams m{a, s, sign};
    const ScanTrace model_up = hysteresis_scan(grid_of(up), ScanDirection::increasing, m, p);
    const ScanTrace model_down = hysteresis_scan(grid_of(down), ScanDirection::decreasing, m, p);
    double obj = 0.0, wsum = 0.0;
    accumulate_trace(model_up, up, obj, wsum);
    accumulate_trace(model_down, down, obj, wsum);
    return {obj, wsum};
}

FitResult fit_model(const ScanTrace& up, const ScanTrace& down, const PhysicalParams& p,
                    const FitOptions& options) {
    p.validate();
    if (up.direction != ScanDirection::increasing ||
        down.direction != ScanDirection::decreasing) {
        throw std::invalid_argument("fit_model: need one increasing and one decreasing trace");
    }
    if (up.samples.size() < 2 || up.samples.size() != down.samples.size()) {
        throw std::invalid_argument("fit_model: traces must share a detuning grid");
    }
    for (std::size_t i = 0; i < up.samples.size(); ++i) {
        const double mirrored = down.samples[down.samples.size() - 1 - i].detuning;
        if (std::abs(up.samples[i].detuning - mirrored) > 1e-9) {
            throw std::invalid_argument("fit_model: traces must share a detuning grid");
        }
    }
    if (!(options.a_lo < options.a_hi) || !(options.s_lo < options.s_hi) ||
        options.a_lo < 0.0 || options.s_lo < 0.0) {
        throw std::invalid_argument("fit_model: invalid parameter bounds");
    }
    if (!(options.tol > 0.0) || options.max_iter < 1) {
        throw std::invalid_argument("fit_model: invalid tolerance or iteration cap");
    }

    auto clamp_a = [&](double a) { return std::clamp(a, options.a_lo, options.a_hi); };
    auto clamp_s = [&](double s) { return std::clamp(s, options.s_lo, options.s_hi); };
    double wsum_last = 1.0;
    auto eval = [&](double a, double s) {
        const auto [obj, wsum] = fit_objective(up, down, a, s, options.sign, p);
        wsum_last = wsum;
        return obj;
    };

    double a0, s0;
    if (options.seed) {
        a0 = clamp_a(options.seed->first);
        s0 = clamp_s(options.seed->second);
    } else {
        double best = 0.0;
        a0 = options.a_lo;
        s0 = options.s_lo;
        bool first = true;
        for (int i = 0; i < 20; ++i) {
            const double a = options.a_lo + (options.a_hi - options.a_lo) * i / 19.0;
            for (int j = 0; j < 20; ++j) {
                const double s = options.s_lo + (options.s_hi - options.s_lo) * j / 19.0;
                const double f = eval(a, s);
                if (first || f < best) {
                    best = f;
                    a0 = a;
                    s0 = s;
                    first = false;
                }
            }
        }
    }

    // Nelder-Mead with bound clamping.
    const double da = 0.05 * (options.a_hi - options.a_lo) * (a0 + 1.0 < options.a_hi ? 1 : -1);
    const double ds = 0.05 * (options.s_hi - options.s_lo) * (s0 + 1.0 < options.s_hi ? 1 : -1);
    Vertex v[3] = {{a0, s0, 0.0},
                   {clamp_a(a0 + da), s0, 0.0},
                   {a0, clamp_s(s0 + ds), 0.0}};
    for (Vertex& vert : v) vert.f = eval(vert.a, vert.s);

    FitResult result;
    int iter = 0;
    for (; iter < options.max_iter; ++iter) {
        std::sort(std::begin(v), std::end(v),
                  [](const Vertex& l, const Vertex& r) { return l.f < r.f; });
        const double spread_a =
            std::max({v[0].a, v[1].a, v[2].a}) - std::min({v[0].a, v[1].a, v[2].a});
        const double spread_s =
            std::max({v[0].s, v[1].s, v[2].s}) - std::min({v[0].s, v[1].s, v[2].s});
        if (spread_a < options.tol && spread_s < options.tol) {
            result.converged = true;
            break;
        }

        const double ca = 0.5 * (v[0].a + v[1].a);
        const double cs = 0.5 * (v[0].s + v[1].s);
        Vertex refl{clamp_a(2.0 * ca - v[2].a), clamp_s(2.0 * cs - v[2].s), 0.0};
        refl.f = eval(refl.a, refl.s);
        if (refl.f < v[0].f) {
            Vertex expand{clamp_a(3.0 * ca - 2.0 * v[2].a), clamp_s(3.0 * cs - 2.0 * v[2].s), 0.0};
            expand.f = eval(expand.a, expand.s);
            v[2] = expand.f < refl.f ? expand : refl;
        } else if (refl.f < v[1].f) {
            v[2] = refl;
        } else {
            Vertex contract{clamp_a(0.5 * (ca + v[2].a)), clamp_s(0.5 * (cs + v[2].s)), 0.0};
            contract.f = eval(contract.a, contract.s);
            if (contract.f < v[2].f) {
                v[2] = contract;
            } else {
                for (int i = 1; i < 3; ++i) {
                    v[i].a = clamp_a(0.5 * (v[i].a + v[0].a));
                    v[i].s = clamp_s(0.5 * (v[i].s + v[0].s));
                    v[i].f = eval(v[i].a, v[i].s);
                }
            }
        }
    }

    std::sort(std::begin(v), std::end(v),
              [](const Vertex& l, const Vertex& r) { return l.f < r.f; });
    result.a_est = v[0].a;
    result.s_est = v[0].s;
    const double best_obj = eval(v[0].a, v[0].s);  // refresh wsum_last for this vertex
    result.residual_rms = std::sqrt(best_obj / wsum_last);
    result.iterations = iter;
    return result;
}

}  // namespace bistab
