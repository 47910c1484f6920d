#include "gazefake/signal_kit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "gazefake/errors.hpp"

namespace gazefake {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// In-place iterative radix-2 FFT.
void fft_radix2(std::vector<cd>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd w = std::polar(1.0, ang * static_cast<double>(k));
                const cd u = a[i + k];
                const cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

std::vector<cd> dft(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    if (is_pow2(n)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
        fft_radix2(out);
        return out;
    }
    // Lengths that are not powers of two are rare here; plain O(n^2) sum.
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
            acc += x[t] * std::polar(1.0, ang);
        }
        out[k] = acc;
    }
    return out;
}

std::vector<double> centered(std::span<const double> x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<double> out(x.begin(), x.end());
    for (double& v : out) v -= mean;
    return out;
}

}  // namespace

std::vector<SequenceWindow> slice_sequences(const Track& track, int omega) {
    if (omega < 2) throw InvalidWindow("omega must be >= 2, got " + std::to_string(omega));
    std::vector<SequenceWindow> out;
    const auto& recs = track.records;
    const std::size_t w = static_cast<std::size_t>(omega);

    std::size_t start = 0;
    while (start + w <= recs.size()) {
        std::size_t bad = w;  // offset of the first offending record, w when none
        for (std::size_t k = 0; k < w; ++k) {
            const auto& rec = recs[start + k];
            if (!rec.valid()) {
                bad = k;
                break;
            }
            if (k > 0 && rec.frame_index != recs[start + k - 1].frame_index + 1) {
                // gap before this record; it may still open the next window
                bad = k - 1;
                break;
            }
        }
        if (bad < w) {
            start += bad + 1;
            continue;
        }
        SequenceWindow win;
        win.video_id = track.video_id;
        win.label = track.label;
        win.start_frame = recs[start].frame_index;
        win.omega = omega;
        win.frames.reserve(w);
        for (std::size_t k = 0; k < w; ++k) {
            const auto& rec = recs[start + k];
            win.frames.push_back({rec.frame_index, visual_frame(rec), geo_frame(rec)});
        }
        out.push_back(std::move(win));
        start += w;
    }
    return out;
}

void ss_normalize_inplace(std::span<double> values) {
    if (values.empty()) return;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double mn = *lo;
    const double range = *hi - mn;
    for (double& v : values) v = (v - mn) / (range + kSsEpsilon);
}

Signal ss_normalize(const Signal& sig) {
    Signal out = sig;
    for (auto& ch : out.channels) ss_normalize_inplace(ch);
    return out;
}

std::vector<double> periodogram(std::span<const double> x) {
    const auto spectrum = dft(x);
    std::vector<double> p(x.size());
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(spectrum[k]) / n;
    return p;
}

Signal psd(const Signal& sig) {
    Signal out;
    out.channels.reserve(sig.num_channels());
    for (const auto& ch : sig.channels) {
        auto p = periodogram(ch);
        ss_normalize_inplace(p);
        out.channels.push_back(std::move(p));
    }
    return out;
}

std::vector<double> xcorr_raw(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw LengthMismatch("xcorr inputs differ in length");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
    std::vector<double> out(a.size(), 0.0);
    if (n == 0) return out;

    const auto ac = centered(a);
    const auto bc = centered(b);
    const double norm = std::sqrt(std::inner_product(ac.begin(), ac.end(), ac.begin(), 0.0) *
                                  std::inner_product(bc.begin(), bc.end(), bc.begin(), 0.0));
    if (norm <= 0.0) return out;

    const std::ptrdiff_t half = n / 2;
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const std::ptrdiff_t lag = j - half;
        double acc = 0.0;
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, -lag); i < std::min(n, n - lag); ++i)
            acc += ac[i] * bc[i + lag];
        out[j] = std::clamp(acc / norm, -1.0, 1.0);
    }
    return out;
}

Signal xcorr(const Signal& a, const Signal& b) {
    if (a.num_channels() != b.num_channels() || a.length() != b.length())
        throw LengthMismatch("xcorr signals differ in shape");
    Signal out;
    for (std::size_t c = 0; c < a.num_channels(); ++c) {
        auto r = xcorr_raw(a.channels[c], b.channels[c]);
        ss_normalize_inplace(r);
        out.channels.push_back(std::move(r));
    }
    return out;
}

}  // namespace gazefake
