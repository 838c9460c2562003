#include "clasp/image.hpp"

#include "clasp/error.hpp"

#include <algorithm>

namespace clasp {

int LabelMask::label_bound() const noexcept {
    int bound = 0;
    for (int l : labels) {
        bound = std::max(bound, l + 1);
    }
    return bound;
}

namespace {

int nearest_source(int dst, int src_size, int dst_size) {
    const long long s = (2LL * dst + 1) * src_size / (2LL * dst_size);
    return static_cast<int>(std::min<long long>(s, src_size - 1));
}

}  // namespace

LabelMask resize_nearest(const LabelMask& mask, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0 || mask.h <= 0 || mask.w <= 0) {
        fail(ErrorCode::InvalidArgument, "resize needs positive dimensions");
    }
    LabelMask out(out_h, out_w);
    std::vector<int> src_x(static_cast<std::size_t>(out_w));
    for (int x = 0; x < out_w; ++x) {
        src_x[static_cast<std::size_t>(x)] = nearest_source(x, mask.w, out_w);
    }
    for (int y = 0; y < out_h; ++y) {
        const int sy = nearest_source(y, mask.h, out_h);
        for (int x = 0; x < out_w; ++x) {
            out.at(y, x) = mask.at(sy, src_x[static_cast<std::size_t>(x)]);
        }
    }
    return out;
}

RgbImage downsample_area(const RgbImage& image, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0 || out_h > image.h || out_w > image.w) {
        fail(ErrorCode::InvalidArgument, "area downsample needs 0 < output <= input size");
    }
    RgbImage out(out_h, out_w);
    for (int y = 0; y < out_h; ++y) {
        const int y0 = static_cast<int>(static_cast<long long>(y) * image.h / out_h);
        const int y1 = static_cast<int>(static_cast<long long>(y + 1) * image.h / out_h);
        for (int x = 0; x < out_w; ++x) {
            const int x0 = static_cast<int>(static_cast<long long>(x) * image.w / out_w);
            const int x1 = static_cast<int>(static_cast<long long>(x + 1) * image.w / out_w);
            long long sum[3] = {0, 0, 0};
            for (int sy = y0; sy < y1; ++sy) {
                for (int sx = x0; sx < x1; ++sx) {
                    const auto* p = image.pixel(sy, sx);
                    sum[0] += p[0];
                    sum[1] += p[1];
                    sum[2] += p[2];
                }
            }
            const long long count = static_cast<long long>(y1 - y0) * (x1 - x0);
            auto* q = out.pixel(y, x);
            for (int c = 0; c < 3; ++c) {
                q[c] = static_cast<std::uint8_t>((2 * sum[c] + count) / (2 * count));
            }
        }
    }
    return out;
}

}  // namespace clasp
