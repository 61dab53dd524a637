#include "dtm/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace dtm {

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("GrayImage: dimensions must be >= 1");
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> data)
    : width(w), height(h), pixels(std::move(data)) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("GrayImage: dimensions must be >= 1");
    if (pixels.size() != static_cast<std::size_t>(w) * h)
        throw std::invalid_argument("GrayImage: pixel count does not match dimensions");
}

AffineMap AffineMap::translation(double tx, double ty) {
    return {1, 0, tx, 0, 1, ty};
}

AffineMap AffineMap::scaling(double sx, double sy) {
    return {sx, 0, 0, 0, sy, 0};
}

AffineMap AffineMap::rotation(double radians) {
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    return {c, -s, 0, s, c, 0};
}

AffineMap AffineMap::compose(const AffineMap& o) const {
    return {a * o.a + b * o.d, a * o.b + b * o.e, a * o.c + b * o.f + c,
            d * o.a + e * o.d, d * o.b + e * o.e, d * o.c + e * o.f + f};
}

AffineMap AffineMap::inverse() const {
    const double det = a * e - b * d;
    if (std::abs(det) < 1e-12)
        throw std::runtime_error("AffineMap::inverse: singular transform");
    const double ia = e / det;
    const double ib = -b / det;
    const double id = -d / det;
    const double ie = a / det;
    return {ia, ib, -(ia * c + ib * f), id, ie, -(id * c + ie * f)};
}

void AffineMap::apply(double x, double y, double& ox, double& oy) const {
    ox = a * x + b * y + c;
    oy = d * x + e * y + f;
}

Homography Homography::from_affine(const AffineMap& a) {
    Homography h;
    h.m = {a.a, a.b, a.c, a.d, a.e, a.f, 0, 0, 1};
    return h;
}

double Homography::det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
    const double d = det();
    if (std::abs(d) < 1e-12)
        throw std::runtime_error("Homography::inverse: singular matrix");
    Homography r;
    r.m[0] = (m[4] * m[8] - m[5] * m[7]) / d;
    r.m[1] = (m[2] * m[7] - m[1] * m[8]) / d;
    r.m[2] = (m[1] * m[5] - m[2] * m[4]) / d;
    r.m[3] = (m[5] * m[6] - m[3] * m[8]) / d;
    r.m[4] = (m[0] * m[8] - m[2] * m[6]) / d;
    r.m[5] = (m[2] * m[3] - m[0] * m[5]) / d;
    r.m[6] = (m[3] * m[7] - m[4] * m[6]) / d;
    r.m[7] = (m[1] * m[6] - m[0] * m[7]) / d;
    r.m[8] = (m[0] * m[4] - m[1] * m[3]) / d;
    return r;
}

Homography Homography::normalized() const {
    Homography r = *this;
    if (std::abs(r.m[8]) > 0) {
        for (double& v : r.m)
            v /= m[8];
    }
    return r;
}

void Homography::apply(double x, double y, double& ox, double& oy) const {
    const double w = m[6] * x + m[7] * y + m[8];
    if (std::abs(w) < 1e-12)
        throw std::runtime_error("Homography::apply: point maps to infinity");
    ox = (m[0] * x + m[1] * y + m[2]) / w;
    oy = (m[3] * x + m[4] * y + m[5]) / w;
}

namespace {

// Reads the next whitespace-delimited PGM header token, skipping '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c))
            continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
            tok.push_back(static_cast<char>(in.get()));
        return tok;
    }
    throw std::runtime_error("PGM: truncated header");
}

int parse_pgm_int(const std::string& tok, const char* what) {
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::runtime_error(std::string("PGM: malformed ") + what + " '" + tok + "'");
    long v = std::strtol(tok.c_str(), nullptr, 10);
    if (v < 0 || v > 1 << 24)
        throw std::runtime_error(std::string("PGM: out-of-range ") + what);
    return static_cast<int>(v);
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("PGM: cannot open '" + path + "'");
    if (next_pgm_token(in) != "P5")
        throw std::runtime_error("PGM: '" + path + "' is not binary PGM (P5)");
    const int w = parse_pgm_int(next_pgm_token(in), "width");
    const int h = parse_pgm_int(next_pgm_token(in), "height");
    const int maxval = parse_pgm_int(next_pgm_token(in), "maxval");
    if (w < 1 || h < 1)
        throw std::runtime_error("PGM: '" + path + "' has empty dimensions");
    if (maxval != 255)
        throw std::runtime_error("PGM: '" + path + "' maxval must be 255");
    // Exactly one whitespace byte separates the header from the payload; the
    // token reader has already consumed it via peek boundaries, so the next
    // byte after the maxval token is it.
    const int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw std::runtime_error("PGM: '" + path + "' malformed header separator");
    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("PGM: '" + path + "' truncated payload");
    return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
    if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
        throw std::invalid_argument("save_pgm: invalid image");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("PGM: cannot write '" + path + "'");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out)
        throw std::runtime_error("PGM: write failed for '" + path + "'");
}

GrayImage crop(const GrayImage& img, const BBox& box) {
    if (box.xmin < 0 || box.ymin < 0 || box.xmax > img.width || box.ymax > img.height ||
        box.xmin >= box.xmax || box.ymin >= box.ymax)
        throw std::invalid_argument("crop: bbox out of bounds or empty");
    GrayImage out(box.width(), box.height());
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = img.at(box.xmin + x, box.ymin + y);
    return out;
}

double sample_bilinear(const GrayImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto tap = [&](int px, int py) -> double {
        if (px < 0 || py < 0 || px >= img.width || py >= img.height)
            return 0.0;
        return img.at(px, py);
    };
    const double top = tap(x0, y0) * (1 - fx) + tap(x0 + 1, y0) * fx;
    const double bot = tap(x0, y0 + 1) * (1 - fx) + tap(x0 + 1, y0 + 1) * fx;
    return top * (1 - fy) + bot * fy;
}

namespace {

std::uint8_t to_u8(double v) {
    const double r = std::lround(v);
    return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

}  // namespace

GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("resize_bilinear: zero target dimension");
    if (out_w == img.width && out_h == img.height)
        return img;
    GrayImage out(out_w, out_h);
    const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / (out_w - 1) : 0.0;
    const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / (out_h - 1) : 0.0;
    const double ox = out_w > 1 ? 0.0 : (img.width - 1) / 2.0;
    const double oy = out_h > 1 ? 0.0 : (img.height - 1) / 2.0;
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            out.at(x, y) = to_u8(sample_bilinear(img, ox + x * sx, oy + y * sy));
    return out;
}

GrayImage warp_affine(const GrayImage& img, const AffineMap& map, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("warp_affine: zero target dimension");
    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double sx, sy;
            map.apply(x, y, sx, sy);
            out.at(x, y) = to_u8(sample_bilinear(img, sx, sy));
        }
    }
    return out;
}

GrayImage warp_homography(const GrayImage& img, const Homography& h, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("warp_homography: zero target dimension");
    if (std::abs(h.det()) < 1e-12)
        throw std::invalid_argument("warp_homography: singular homography");
    GrayImage out(out_w, out_h);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double sx, sy;
            h.apply(x, y, sx, sy);
            out.at(x, y) = to_u8(sample_bilinear(img, sx, sy));
        }
    }
    return out;
}

}  // namespace dtm
