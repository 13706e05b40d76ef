#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "paveval/raster.hpp"

namespace paveval {

namespace detail {

inline std::uint8_t clamp_u8(long v) {
    return static_cast<std::uint8_t>(std::clamp<long>(v, 0, 255));
}

inline std::uint8_t round_u8(double v) { return clamp_u8(std::lround(v)); }

}  // namespace detail

inline Raster hflip_raster(const Raster& in) {
    Raster out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = in.at(in.width - 1 - x, y, c);
            }
        }
    }
    return out;
}

inline Raster vflip_raster(const Raster& in) {
    Raster out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = in.at(x, in.height - 1 - y, c);
            }
        }
    }
    return out;
}

// v -> constant - v, clamped. The usual 8-bit negative is constant = 255.
inline Raster invert_raster(const Raster& in, double constant = 255.0) {
    Raster out(in.width, in.height);
    for (size_t i = 0; i < in.data.size(); ++i) {
        out.data[i] = detail::round_u8(constant - in.data[i]);
    }
    return out;
}

// Bilinear resample with half-pixel centers and replicated edges.
inline Raster resize_bilinear(const Raster& in, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0) throw ValidationError("resize target must be positive");
    if (out_w == in.width && out_h == in.height) return in;
    Raster out(out_w, out_h);
    const double sx = static_cast<double>(in.width) / out_w;
    const double sy = static_cast<double>(in.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double src_y = (y + 0.5) * sy - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(src_y)), 0, in.height - 1);
        const int y1 = std::min(y0 + 1, in.height - 1);
        const double fy = std::clamp(src_y - y0, 0.0, 1.0);
        for (int x = 0; x < out_w; ++x) {
            const double src_x = (x + 0.5) * sx - 0.5;
            const int x0 = std::clamp(static_cast<int>(std::floor(src_x)), 0, in.width - 1);
            const int x1 = std::min(x0 + 1, in.width - 1);
            const double fx = std::clamp(src_x - x0, 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                const double top = in.at(x0, y0, c) * (1.0 - fx) + in.at(x1, y0, c) * fx;
                const double bot = in.at(x0, y1, c) * (1.0 - fx) + in.at(x1, y1, c) * fx;
                out.at(x, y, c) = detail::round_u8(top * (1.0 - fy) + bot * fy);
            }
        }
    }
    return out;
}

inline Raster crop_raster(const Raster& in, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > in.width || y0 + h > in.height) {
        throw ValidationError("crop window outside raster");
    }
    Raster out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = in.at(x0 + x, y0 + y, c);
        }
    }
    return out;
}

inline void paste_raster(Raster& dst, const Raster& src, int x0, int y0) {
    if (x0 < 0 || y0 < 0 || x0 + src.width > dst.width || y0 + src.height > dst.height) {
        throw ValidationError("paste region outside raster");
    }
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            for (int c = 0; c < 3; ++c) dst.at(x0 + x, y0 + y, c) = src.at(x, y, c);
        }
    }
}

// v -> round(v - channel_mean + 128), clamped; centers each channel at gray.
inline Raster mean_normalize_raster(const Raster& in) {
    Raster out(in.width, in.height);
    const size_t n = static_cast<size_t>(in.width) * in.height;
    double mean[3] = {0, 0, 0};
    for (size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) mean[c] += in.data[i * 3 + c];
    }
    for (int c = 0; c < 3; ++c) mean[c] /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            out.data[i * 3 + c] = detail::round_u8(in.data[i * 3 + c] - mean[c] + 128.0);
        }
    }
    return out;
}

// Separable Gaussian with a normalized kernel and replicated edges.
inline Raster gaussian_filter_raster(const Raster& in, double sigma = 1.0, int ksize = 5) {
    if (ksize <= 0 || ksize % 2 == 0) {
        throw ValidationError("gaussian ksize must be odd and positive");
    }
    if (!(sigma > 0.0)) throw ValidationError("gaussian sigma must be positive");
    const int radius = ksize / 2;
    std::vector<double> kernel(ksize);
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double d = i - radius;
        kernel[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += kernel[i];
    }
    for (double& k : kernel) k /= sum;

    const int w = in.width, h = in.height;
    std::vector<double> tmp(static_cast<size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int xx = std::clamp(x + k, 0, w - 1);
                    acc += kernel[k + radius] * in.at(xx, y, c);
                }
                tmp[(static_cast<size_t>(y) * w + x) * 3 + c] = acc;
            }
        }
    }
    Raster out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int k = -radius; k <= radius; ++k) {
                    const int yy = std::clamp(y + k, 0, h - 1);
                    acc += kernel[k + radius] * tmp[(static_cast<size_t>(yy) * w + x) * 3 + c];
                }
                out.at(x, y, c) = detail::round_u8(acc);
            }
        }
    }
    return out;
}

namespace detail {

// Integer luma of the lossless YCoCg-R decomposition.
inline int ycocg_luma(int r, int g, int b) {
    const int co = r - b;
    const int t = b + (co >> 1);
    const int cg = g - t;
    return t + (cg >> 1);
}

}  // namespace detail

// Histogram equalization on the luma of a luma/chroma (YCoCg-R)
// decomposition. Changing that luma while holding chroma shifts all three
// channels by the same integer delta, so the remap stays exact; the delta is
// clamped so channels never leave [0,255]. A constant image maps to itself.
inline Raster hist_equalize_raster(const Raster& in) {
    const size_t n = static_cast<size_t>(in.width) * in.height;
    std::vector<int> luma(n);
    std::array<long long, 256> hist{};
    for (size_t i = 0; i < n; ++i) {
        luma[i] = detail::ycocg_luma(in.data[i * 3], in.data[i * 3 + 1], in.data[i * 3 + 2]);
        ++hist[std::clamp(luma[i], 0, 255)];
    }
    std::array<long long, 256> cdf{};
    long long running = 0;
    long long cdf_min = 0;
    bool found_min = false;
    for (int v = 0; v < 256; ++v) {
        running += hist[v];
        cdf[v] = running;
        if (!found_min && hist[v] > 0) {
            cdf_min = running;
            found_min = true;
        }
    }
    std::array<int, 256> remap{};
    const double denom = static_cast<double>(static_cast<long long>(n) - cdf_min);
    for (int v = 0; v < 256; ++v) {
        remap[v] = denom <= 0.0
                       ? v
                       : static_cast<int>(std::lround(
                             255.0 * static_cast<double>(cdf[v] - cdf_min) / denom));
    }

    Raster out(in.width, in.height);
    for (size_t i = 0; i < n; ++i) {
        const int r = in.data[i * 3], g = in.data[i * 3 + 1], b = in.data[i * 3 + 2];
        const int delta = remap[std::clamp(luma[i], 0, 255)] - luma[i];
        const int lo = -std::min({r, g, b});
        const int hi = 255 - std::max({r, g, b});
        const int d = std::clamp(delta, lo, hi);
        out.data[i * 3] = static_cast<std::uint8_t>(r + d);
        out.data[i * 3 + 1] = static_cast<std::uint8_t>(g + d);
        out.data[i * 3 + 2] = static_cast<std::uint8_t>(b + d);
    }
    return out;
}

namespace detail {

inline void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    v = mx;
    const double d = mx - mn;
    s = mx == 0.0 ? 0.0 : d / mx;
    if (d == 0.0) {
        h = 0.0;
    } else if (mx == r) {
        h = 60.0 * std::fmod((g - b) / d, 6.0);
    } else if (mx == g) {
        h = 60.0 * ((b - r) / d + 2.0);
    } else {
        h = 60.0 * ((r - g) / d + 4.0);
    }
    if (h < 0.0) h += 360.0;
}

inline void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1) {
        r1 = c; g1 = x;
    } else if (hp < 2) {
        r1 = x; g1 = c;
    } else if (hp < 3) {
        g1 = c; b1 = x;
    } else if (hp < 4) {
        g1 = x; b1 = c;
    } else if (hp < 5) {
        r1 = x; b1 = c;
    } else {
        r1 = c; b1 = x;
    }
    const double m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

}  // namespace detail

// Hue rotation by dh degrees in HSV, then contrast v -> (v-128)*(1+dc)+128.
inline Raster hue_contrast_raster(const Raster& in, double dh, double dc) {
    Raster out(in.width, in.height);
    const size_t n = static_cast<size_t>(in.width) * in.height;
    for (size_t i = 0; i < n; ++i) {
        double h, s, v;
        detail::rgb_to_hsv(in.data[i * 3] / 255.0, in.data[i * 3 + 1] / 255.0,
                           in.data[i * 3 + 2] / 255.0, h, s, v);
        h = std::fmod(h + dh, 360.0);
        if (h < 0.0) h += 360.0;
        double r, g, b;
        detail::hsv_to_rgb(h, s, v, r, g, b);
        const double ch[3] = {r * 255.0, g * 255.0, b * 255.0};
        for (int c = 0; c < 3; ++c) {
            out.data[i * 3 + c] = detail::round_u8((ch[c] - 128.0) * (1.0 + dc) + 128.0);
        }
    }
    return out;
}

inline Raster median_blur_raster(const Raster& in, int ksize = 3) {
    if (ksize <= 0 || ksize % 2 == 0) {
        throw ValidationError("median ksize must be odd and positive");
    }
    const int radius = ksize / 2;
    Raster out(in.width, in.height);
    std::vector<std::uint8_t> window;
    window.reserve(static_cast<size_t>(ksize) * ksize);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                window.clear();
                for (int ky = -radius; ky <= radius; ++ky) {
                    const int yy = std::clamp(y + ky, 0, in.height - 1);
                    for (int kx = -radius; kx <= radius; ++kx) {
                        const int xx = std::clamp(x + kx, 0, in.width - 1);
                        window.push_back(in.at(xx, yy, c));
                    }
                }
                auto mid = window.begin() + window.size() / 2;
                std::nth_element(window.begin(), mid, window.end());
                out.at(x, y, c) = *mid;
            }
        }
    }
    return out;
}

// v -> (v-128)*(1+dc) + 128 + db, clamped.
inline Raster brightness_contrast_raster(const Raster& in, double db, double dc) {
    Raster out(in.width, in.height);
    for (size_t i = 0; i < in.data.size(); ++i) {
        out.data[i] = detail::round_u8((in.data[i] - 128.0) * (1.0 + dc) + 128.0 + db);
    }
    return out;
}

}  // namespace paveval
