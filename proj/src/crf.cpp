#include "clasp/crf.hpp"

#include "clasp/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace clasp {

void CrfConfig::validate() const {
    if (iterations < 1) {
        fail(ErrorCode::InvalidArgument, "CRF iterations must be at least 1");
    }
    if (!(gt_prob > 0.0 && gt_prob < 1.0)) {
        fail(ErrorCode::InvalidArgument, "CRF gt_prob must lie in (0, 1)");
    }
    if (!(gauss_sxy > 0.0 && bilat_sxy > 0.0 && bilat_srgb > 0.0)) {
        fail(ErrorCode::InvalidArgument, "CRF standard deviations must be positive");
    }
    if (!(gauss_compat >= 0.0 && bilat_compat >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "CRF compatibility weights must be non-negative");
    }
    if (max_pixels < 1) {
        fail(ErrorCode::InvalidArgument, "CRF pixel budget must be positive");
    }
}

UnaryPotentials unary_from_labels(const LabelMask& mask, int k, double gt_prob) {
    if (k < 2) {
        fail(ErrorCode::BadK, "unary potentials need k >= 2");
    }
    if (!(gt_prob > 0.0 && gt_prob < 1.0)) {
        fail(ErrorCode::InvalidArgument, "gt_prob must lie in (0, 1)");
    }
    if (mask.labels.size() != static_cast<std::size_t>(mask.h) * mask.w) {
        fail(ErrorCode::DimensionMismatch, "mask buffer does not match its dimensions");
    }
    const double on = -std::log(gt_prob);
    const double off = -std::log((1.0 - gt_prob) / (k - 1));
    UnaryPotentials u(mask.h, mask.w, k);
    for (std::size_t p = 0; p < mask.labels.size(); ++p) {
        const int l = mask.labels[p];
        if (l < 0 || l >= k) {
            fail(ErrorCode::InvalidArgument, "label " + std::to_string(l) + " outside [0, k)");
        }
        for (int c = 0; c < k; ++c) {
            u.at(p, c) = c == l ? on : off;
        }
    }
    return u;
}

namespace {

std::vector<double> gaussian_table(int size, double sigma) {
    std::vector<double> t(static_cast<std::size_t>(std::max(size, 1)));
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int d = 0; d < static_cast<int>(t.size()); ++d) {
        t[static_cast<std::size_t>(d)] = std::exp(-static_cast<double>(d) * d * inv);
    }
    return t;
}

// Q = softmax(-energy) per pixel, in place.
void softmax_negated(std::vector<double>& energy_to_q, std::size_t pixels, int k) {
    for (std::size_t p = 0; p < pixels; ++p) {
        double* e = energy_to_q.data() + p * k;
        double lo = e[0];
        for (int l = 1; l < k; ++l) {
            lo = std::min(lo, e[l]);
        }
        double sum = 0.0;
        for (int l = 0; l < k; ++l) {
            e[l] = std::exp(lo - e[l]);
            sum += e[l];
        }
        const double inv = 1.0 / sum;
        for (int l = 0; l < k; ++l) {
            e[l] *= inv;
        }
    }
}

// Gaussian spatial message, exact via separability of the kernel.
void spatial_message(const MarginalField& q, const std::vector<double>& gx, const std::vector<double>& gy,
                     std::vector<double>& tmp, std::vector<double>& out) {
    const int h = q.h;
    const int w = q.w;
    const int k = q.k;
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double* t = tmp.data() + (static_cast<std::size_t>(y) * w + x) * k;
            for (int x2 = 0; x2 < w; ++x2) {
                const double g = gx[static_cast<std::size_t>(std::abs(x - x2))];
                const double* s = q.values.data() + (static_cast<std::size_t>(y) * w + x2) * k;
                for (int l = 0; l < k; ++l) {
                    t[l] += g * s[l];
                }
            }
        }
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int y2 = 0; y2 < h; ++y2) {
            const double g = gy[static_cast<std::size_t>(std::abs(y - y2))];
            double* o = out.data() + static_cast<std::size_t>(y) * w * k;
            const double* s = tmp.data() + static_cast<std::size_t>(y2) * w * k;
            for (std::size_t i = 0; i < static_cast<std::size_t>(w) * k; ++i) {
                o[i] += g * s[i];
            }
        }
    }
    // Remove the self term (kernel value 1 at zero offset).
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= q.values[i];
    }
}

// Bilateral message over every unordered pair once. Colours are integers, so
// the colour kernel factors into per-channel table lookups. Work buffers are
// label-major so the inner loops vectorize.
struct BilateralTables {
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> gc;
};

void bilateral_message(const MarginalField& q, const RgbImage& image, const BilateralTables& t,
                       std::vector<double>& q_lm, std::vector<double>& out_lm, std::vector<double>& out) {
    const int h = q.h;
    const int w = q.w;
    const int k = q.k;
    const std::size_t n = q.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        for (int l = 0; l < k; ++l) {
            q_lm[static_cast<std::size_t>(l) * n + p] = q.values[p * k + l];
        }
    }
    std::fill(out_lm.begin(), out_lm.end(), 0.0);

    std::vector<int> r(n), g(n), b(n);
    for (std::size_t p = 0; p < n; ++p) {
        r[p] = image.rgb[p * 3];
        g[p] = image.rgb[p * 3 + 1];
        b[p] = image.rgb[p * 3 + 2];
    }
    std::vector<double> wbuf(static_cast<std::size_t>(w));
    std::vector<double> acc(static_cast<std::size_t>(k));
    std::vector<double> qi(static_cast<std::size_t>(k));

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const int ri = r[i];
            const int gi = g[i];
            const int bi = b[i];
            for (int l = 0; l < k; ++l) {
                qi[static_cast<std::size_t>(l)] = q_lm[static_cast<std::size_t>(l) * n + i];
                acc[static_cast<std::size_t>(l)] = 0.0;
            }
            for (int y2 = y; y2 < h; ++y2) {
                const double wy = t.gy[static_cast<std::size_t>(y2 - y)];
                const int x0 = y2 == y ? x + 1 : 0;
                const int len = w - x0;
                if (len <= 0) {
                    continue;
                }
                const std::size_t row = static_cast<std::size_t>(y2) * w + x0;
                for (int x2 = x0; x2 < w; ++x2) {
                    const std::size_t j = static_cast<std::size_t>(y2) * w + x2;
                    const int dr = std::abs(ri - r[j]);
                    const int dg = std::abs(gi - g[j]);
                    const int db = std::abs(bi - b[j]);
                    wbuf[static_cast<std::size_t>(x2 - x0)] =
                        wy * t.gx[static_cast<std::size_t>(std::abs(x2 - x))] * t.gc[static_cast<std::size_t>(dr)] *
                        t.gc[static_cast<std::size_t>(dg)] * t.gc[static_cast<std::size_t>(db)];
                }
                for (int l = 0; l < k; ++l) {
                    const double* qj = q_lm.data() + static_cast<std::size_t>(l) * n + row;
                    double* oj = out_lm.data() + static_cast<std::size_t>(l) * n + row;
                    const double ql = qi[static_cast<std::size_t>(l)];
                    const double* wb = wbuf.data();
                    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
                    int m = 0;
                    for (; m + 4 <= len; m += 4) {
                        s0 += wb[m] * qj[m];
                        s1 += wb[m + 1] * qj[m + 1];
                        s2 += wb[m + 2] * qj[m + 2];
                        s3 += wb[m + 3] * qj[m + 3];
                    }
                    for (; m < len; ++m) {
                        s0 += wb[m] * qj[m];
                    }
                    for (m = 0; m < len; ++m) {
                        oj[m] += wb[m] * ql;
                    }
                    acc[static_cast<std::size_t>(l)] += (s0 + s1) + (s2 + s3);
                }
            }
            for (int l = 0; l < k; ++l) {
                out_lm[static_cast<std::size_t>(l) * n + i] += acc[static_cast<std::size_t>(l)];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        for (int l = 0; l < k; ++l) {
            out[p * k + l] = out_lm[static_cast<std::size_t>(l) * n + p];
        }
    }
}

}  // namespace

LabelMask mean_field_refine(const UnaryPotentials& unary, const RgbImage& image, const CrfConfig& cfg,
                            const MeanFieldObserver& observer) {
    cfg.validate();
    if (unary.h != image.h || unary.w != image.w ||
        image.rgb.size() != static_cast<std::size_t>(image.h) * image.w * 3 ||
        unary.values.size() != unary.pixel_count() * static_cast<std::size_t>(unary.k)) {
        fail(ErrorCode::DimensionMismatch, "unary field and image dimensions differ");
    }
    if (unary.k < 1) {
        fail(ErrorCode::BadK, "unary field has no labels");
    }
    const std::size_t n = unary.pixel_count();
    if (n > cfg.max_pixels) {
        fail(ErrorCode::PixelBudgetExceeded, std::to_string(n) + " pixels exceed the CRF budget of " +
                                                 std::to_string(cfg.max_pixels));
    }
    const int h = unary.h;
    const int w = unary.w;
    const int k = unary.k;

    MarginalField q = unary;
    softmax_negated(q.values, n, k);

    const bool use_gauss = cfg.gauss_compat > 0.0;
    const bool use_bilat = cfg.bilat_compat > 0.0;
    const auto ggx = gaussian_table(w, cfg.gauss_sxy);
    const auto ggy = gaussian_table(h, cfg.gauss_sxy);
    const BilateralTables btab{gaussian_table(w, cfg.bilat_sxy), gaussian_table(h, cfg.bilat_sxy),
                               gaussian_table(256, cfg.bilat_srgb)};

    std::vector<double> tmp(q.values.size());
    std::vector<double> gauss_msg(q.values.size(), 0.0);
    std::vector<double> bilat_msg(q.values.size(), 0.0);
    std::vector<double> energy(q.values.size());
    std::vector<double> q_lm(use_bilat ? q.values.size() : 0);
    std::vector<double> out_lm(use_bilat ? q.values.size() : 0);

    for (int it = 1; it <= cfg.iterations; ++it) {
        if (use_gauss) {
            spatial_message(q, ggx, ggy, tmp, gauss_msg);
        }
        if (use_bilat) {
            bilateral_message(q, image, btab, q_lm, out_lm, bilat_msg);
        }
        // Potts: sum_{l' != l} M(l') = sum_l' M(l') - M(l); the first term is
        // constant per pixel and cancels in the normalization.
        for (std::size_t i = 0; i < energy.size(); ++i) {
            energy[i] = unary.values[i] - cfg.gauss_compat * gauss_msg[i] - cfg.bilat_compat * bilat_msg[i];
        }
        softmax_negated(energy, n, k);
        q.values.swap(energy);
        if (observer) {
            observer(it, q);
        }
    }

    LabelMask out(h, w);
    for (std::size_t p = 0; p < n; ++p) {
        int best = 0;
        for (int l = 1; l < k; ++l) {
            if (q.at(p, l) > q.at(p, best)) {
                best = l;
            }
        }
        out.labels[p] = best;
    }
    return out;
}

LabelMask refine_labels(const LabelMask& mask, const RgbImage& image, int k, const CrfConfig& cfg) {
    cfg.validate();
    if (mask.h != image.h || mask.w != image.w) {
        fail(ErrorCode::DimensionMismatch, "mask is " + std::to_string(mask.h) + "x" +
                                               std::to_string(mask.w) + " but image is " +
                                               std::to_string(image.h) + "x" + std::to_string(image.w));
    }
    if (k < 2) {
        fail(ErrorCode::BadK, "CRF refinement needs k >= 2");
    }
    for (const int l : mask.labels) {
        if (l < 0 || l >= k) {
            fail(ErrorCode::InvalidArgument, "label " + std::to_string(l) + " outside [0, k)");
        }
    }
    if (cfg.gauss_compat == 0.0 && cfg.bilat_compat == 0.0) {
        // No pairwise term: the marginals are the unaries, whose argmax is the input.
        return mask;
    }
    const std::size_t n = mask.pixel_count();
    if (n <= cfg.max_pixels) {
        return mean_field_refine(unary_from_labels(mask, k, cfg.gt_prob), image, cfg);
    }

    const double scale = std::sqrt(static_cast<double>(cfg.max_pixels) / static_cast<double>(n));
    int th = std::max(1, static_cast<int>(std::floor(mask.h * scale)));
    int tw = std::max(1, static_cast<int>(std::floor(mask.w * scale)));
    while (static_cast<std::size_t>(th) * tw > cfg.max_pixels) {
        (th >= tw ? th : tw) -= 1;
    }
    CrfConfig small = cfg;
    const double fy = static_cast<double>(th) / mask.h;
    const double fx = static_cast<double>(tw) / mask.w;
    const double f = std::sqrt(fy * fx);
    small.gauss_sxy = cfg.gauss_sxy * f;
    small.bilat_sxy = cfg.bilat_sxy * f;

    const auto low_mask = resize_nearest(mask, th, tw);
    const auto low_image = downsample_area(image, th, tw);
    const auto refined = mean_field_refine(unary_from_labels(low_mask, k, cfg.gt_prob), low_image, small);
    return resize_nearest(refined, mask.h, mask.w);
}

LabelMask upsample_labels(const LabelMask& patch_mask, const ImageGeometry& geometry) {
    if (patch_mask.h != geometry.rows() || patch_mask.w != geometry.cols() ||
        patch_mask.labels.size() != static_cast<std::size_t>(patch_mask.h) * patch_mask.w) {
        fail(ErrorCode::DimensionMismatch, "patch mask is " + std::to_string(patch_mask.h) + "x" +
                                               std::to_string(patch_mask.w) + ", geometry expects " +
                                               std::to_string(geometry.rows()) + "x" +
                                               std::to_string(geometry.cols()));
    }
    LabelMask resized(geometry.resized_h, geometry.resized_w);
    for (int y = 0; y < geometry.resized_h; ++y) {
        for (int x = 0; x < geometry.resized_w; ++x) {
            resized.at(y, x) = patch_mask.at(y / geometry.patch, x / geometry.patch);
        }
    }
    if (geometry.resized_h == geometry.orig_h && geometry.resized_w == geometry.orig_w) {
        return resized;
    }
    return resize_nearest(resized, geometry.orig_h, geometry.orig_w);
}

}  // namespace clasp
