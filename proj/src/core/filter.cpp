// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/core/filter.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace eegpipe::core {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Left-half-plane poles of the analog Butterworth prototype of order n,
// on the unit circle. Conjugate pairs are adjacent for even n.
std::vector<cplx> prototype_poles(int n) {
    std::vector<cplx> poles;
    poles.reserve(n);
    for (int k = 0; k < n; ++k) {
        double theta = kPi * (2.0 * k + n + 1.0) / (2.0 * n);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

// Bilinear map s -> z with fs-scaled tangent pre-warp applied by the caller.
cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

// Groups digital poles into conjugate-pair biquads. Poles are expected in
// conjugate pairs; each section keeps one representative of the pair.
std::vector<Biquad> poles_to_sections(const std::vector<cplx>& zpoles) {
    std::vector<Biquad> sections;
    std::vector<bool> used(zpoles.size(), false);
    for (std::size_t i = 0; i < zpoles.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        const cplx p = zpoles[i];
        // find the conjugate partner
        std::size_t partner = i;
        double best = 1e300;
        for (std::size_t j = i + 1; j < zpoles.size(); ++j) {
            if (used[j]) continue;
            double d = std::abs(zpoles[j] - std::conj(p));
            if (d < best) {
                best = d;
                partner = j;
            }
        }
        Biquad s;
        if (partner != i) {
            used[partner] = true;
            const cplx q = zpoles[partner];
            s.a1 = -(p + q).real();
            s.a2 = (p * q).real();
        } else {
            // lone real pole; first-order section embedded in a biquad
            s.a1 = -p.real();
            s.a2 = 0.0;
        }
        sections.push_back(s);
    }
    return sections;
}

void run_forward(const std::vector<Biquad>& sections, const double* in, double* out,
                 long n) {
    // direct form II transposed, cascade applied section by section
    std::vector<double> z1(sections.size(), 0.0), z2(sections.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        double v = in[i];
        for (std::size_t s = 0; s < sections.size(); ++s) {
            const Biquad& q = sections[s];
            double y = q.b0 * v + z1[s];
            z1[s] = q.b1 * v - q.a1 * y + z2[s];
            z2[s] = q.b2 * v - q.a2 * y;
            v = y;
        }
        out[i] = v;
    }
}

}  // namespace

double SosFilter::magnitude_at(double f_hz) const {
    const cplx z = std::polar(1.0, 2.0 * kPi * f_hz / rate);
    const cplx zi = 1.0 / z;
    cplx h(1.0, 0.0);
    for (const Biquad& s : sections)
        h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
    return std::abs(h);
}

SosFilter design_butterworth(const FilterSpec& spec, double rate) {
    spec.validate(rate);
    const double fs = rate;
    auto warp = [fs](double f_hz) { return 2.0 * fs * std::tan(kPi * f_hz / fs); };

    std::vector<cplx> apoles;          // analog poles
    double ref_hz = 0.0;               // unit-gain reference frequency
    int zeros_at_plus1 = 0;            // digital zeros at z = +1 (from s = 0)

    if (spec.kind == FilterKind::LowPass) {
        const double wc = warp(spec.high_hz);
        for (cplx p : prototype_poles(spec.order)) apoles.push_back(p * wc);
        ref_hz = 0.0;
    } else {
        const double wl = warp(spec.low_hz);
        const double wh = warp(spec.high_hz);
        const double bw = wh - wl;
        const double w0sq = wl * wh;
        for (cplx p : prototype_poles(spec.order)) {
            const cplx q = p * (bw / 2.0);
            const cplx r = std::sqrt(q * q - w0sq);
            apoles.push_back(q + r);
            apoles.push_back(q - r);
        }
        zeros_at_plus1 = spec.order;
        // geometric center mapped back to a digital frequency
        ref_hz = fs / kPi * std::atan(std::sqrt(w0sq) / (2.0 * fs));
    }

    std::vector<cplx> zpoles;
    zpoles.reserve(apoles.size());
    for (cplx s : apoles) zpoles.push_back(bilinear(s, fs));

    SosFilter f;
    f.rate = rate;
    f.sections = poles_to_sections(zpoles);

    // Distribute numerator zeros: band-pass sections get (z-1)(z+1) = z^2 - 1,
    // low-pass sections get (z+1)^2. Section count equals order for band-pass
    // and order/2 for low-pass, so the split is exact.
    int plus1_left = zeros_at_plus1;
    for (Biquad& s : f.sections) {
        if (plus1_left > 0) {
            s.b0 = 1.0;
            s.b1 = 0.0;
            s.b2 = -1.0;
            --plus1_left;
        } else {
            s.b0 = 1.0;
            s.b1 = 2.0;
            s.b2 = 1.0;
        }
    }

    // Normalize to unit gain at the reference frequency.
    const double mag = f.magnitude_at(ref_hz);
    if (!(mag > 0.0) || !std::isfinite(mag))
        throw InvalidCutoff("degenerate filter design: zero gain at reference frequency");
    f.sections.front().b0 /= mag;
    f.sections.front().b1 /= mag;
    f.sections.front().b2 /= mag;
    return f;
}

Eigen::VectorXd sos_filter_forward(const SosFilter& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd y(x.size());
    run_forward(f.sections, x.data(), y.data(), x.size());
    return y;
}

Eigen::VectorXd filtfilt(const SosFilter& f, const Eigen::VectorXd& x) {
    const long n = x.size();
    if (n == 0) return x;
    long pad = 3L * f.pole_count();
    if (pad > n - 1) pad = n - 1;  // short signals: use what is available

    Eigen::VectorXd ext(n + 2 * pad);
    // odd reflection about the end samples keeps level and slope continuous
    for (long i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
    ext.segment(pad, n) = x;
    for (long i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

    Eigen::VectorXd tmp(ext.size());
    run_forward(f.sections, ext.data(), tmp.data(), ext.size());
    tmp.reverseInPlace();
    run_forward(f.sections, tmp.data(), ext.data(), ext.size());
    ext.reverseInPlace();
    return ext.segment(pad, n);
}

Eigen::MatrixXd filtfilt(const SosFilter& f, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd y(x.rows(), x.cols());
    for (long c = 0; c < x.rows(); ++c)
        y.row(c) = filtfilt(f, Eigen::VectorXd(x.row(c).transpose())).transpose();
    return y;
}

}  // namespace eegpipe::core
