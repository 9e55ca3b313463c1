#include "spamnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <png.h>

#include <jpeglib.h>

namespace fs = std::filesystem;

namespace spamnet {

namespace {

// ---- PPM (P6 binary RGB, P5 binary gray) ----

struct PpmCursor {
    const std::uint8_t* p;
    std::size_t n;
    std::size_t pos = 0;
};

bool ppm_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
}

// Skips whitespace and '#' comments between header tokens.
void ppm_skip(PpmCursor& c) {
    while (c.pos < c.n) {
        if (ppm_space(c.p[c.pos])) {
            ++c.pos;
        } else if (c.p[c.pos] == '#') {
            while (c.pos < c.n && c.p[c.pos] != '\n') ++c.pos;
        } else {
            break;
        }
    }
}

std::size_t ppm_int(PpmCursor& c) {
    ppm_skip(c);
    if (c.pos >= c.n || c.p[c.pos] < '0' || c.p[c.pos] > '9')
        throw DecodeError("ppm: malformed header");
    std::size_t v = 0;
    while (c.pos < c.n && c.p[c.pos] >= '0' && c.p[c.pos] <= '9') {
        v = v * 10 + (c.p[c.pos] - '0');
        if (v > 1000000) throw DecodeError("ppm: header value out of range");
        ++c.pos;
    }
    return v;
}

RawImage decode_ppm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5'))
        throw DecodeError("ppm: bad magic");
    const bool gray = bytes[1] == '5';
    PpmCursor c{bytes.data(), bytes.size(), 2};
    const std::size_t w = ppm_int(c);
    const std::size_t h = ppm_int(c);
    const std::size_t maxval = ppm_int(c);
    if (w == 0 || h == 0) throw DecodeError("ppm: zero dimension");
    if (maxval == 0 || maxval > 255)
        throw DecodeError("ppm: only 8-bit maxval supported");
    if (c.pos >= c.n || !ppm_space(c.p[c.pos]))
        throw DecodeError("ppm: missing separator before payload");
    ++c.pos;  // exactly one whitespace byte, then raw samples

    const std::size_t need = w * h * (gray ? 1 : 3);
    if (c.n - c.pos < need) throw DecodeError("ppm: truncated payload");

    RawImage out{h, w, {}};
    out.pixels.resize(w * h * 3);
    const std::uint8_t* src = c.p + c.pos;
    if (gray) {
        for (std::size_t i = 0; i < w * h; ++i) {
            out.pixels[3 * i] = src[i];
            out.pixels[3 * i + 1] = src[i];
            out.pixels[3 * i + 2] = src[i];
        }
    } else {
        std::memcpy(out.pixels.data(), src, need);
    }
    return out;
}

// ---- PNG via libpng's simplified read API ----

RawImage decode_png(const std::vector<std::uint8_t>& bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
        throw DecodeError(std::string("png: ") + image.message);

    image.format = PNG_FORMAT_RGB;
    RawImage out{image.height, image.width, {}};
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    // alpha, if any, is composited against white
    const png_color white{255, 255, 255};
    if (!png_image_finish_read(&image, &white, out.pixels.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("png: " + msg);
    }
    return out;
}

// ---- JPEG via libjpeg ----

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf env;
};

void jpeg_error_trampoline(j_common_ptr cinfo) {
    std::longjmp(reinterpret_cast<JpegErrorMgr*>(cinfo->err)->env, 1);
}

RawImage decode_jpeg(const std::vector<std::uint8_t>& bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    RawImage out;

    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_trampoline;
    if (setjmp(jerr.env)) {
        jpeg_destroy_decompress(&cinfo);
        throw DecodeError("jpeg: corrupt stream");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;  // grayscale sources get replicated
    jpeg_start_decompress(&cinfo);

    out.height = cinfo.output_height;
    out.width = cinfo.output_width;
    out.pixels.resize(out.height * out.width * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = out.pixels.data() +
                       static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

}  // namespace

ImageFormat detect_format(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() >= 4 && bytes[0] == 0x89 && bytes[1] == 'P' &&
        bytes[2] == 'N' && bytes[3] == 'G')
        return ImageFormat::png;
    if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF)
        return ImageFormat::jpeg;
    if (bytes.size() >= 3 && bytes[0] == 'P' && (bytes[1] == '6' || bytes[1] == '5') &&
        ppm_space(bytes[2]))
        return ImageFormat::ppm;
    return ImageFormat::unknown;
}

RawImage decode_image(const std::vector<std::uint8_t>& bytes, ImageFormat format) {
    switch (format) {
        case ImageFormat::ppm:
            return decode_ppm(bytes);
        case ImageFormat::png:
            return decode_png(bytes);
        case ImageFormat::jpeg:
            return decode_jpeg(bytes);
        default:
            throw DecodeError("unsupported image format");
    }
}

RawImage decode_image_auto(const std::vector<std::uint8_t>& bytes) {
    return decode_image(bytes, detect_format(bytes));
}

RawImage resize_bilinear(const RawImage& src, std::size_t out_h, std::size_t out_w) {
    if (src.height == 0 || src.width == 0 ||
        src.pixels.size() != src.height * src.width * 3)
        throw std::invalid_argument("resize_bilinear: malformed source image");
    if (src.height == out_h && src.width == out_w) return src;

    RawImage dst{out_h, out_w, {}};
    dst.pixels.resize(out_h * out_w * 3);
    const double sy_scale = static_cast<double>(src.height) / static_cast<double>(out_h);
    const double sx_scale = static_cast<double>(src.width) / static_cast<double>(out_w);

    for (std::size_t y = 0; y < out_h; ++y) {
        double sy = (static_cast<double>(y) + 0.5) * sy_scale - 0.5;
        if (sy < 0.0) sy = 0.0;
        std::size_t y0 = static_cast<std::size_t>(sy);
        if (y0 > src.height - 1) y0 = src.height - 1;
        const std::size_t y1 = std::min(y0 + 1, src.height - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            double sx = (static_cast<double>(x) + 0.5) * sx_scale - 0.5;
            if (sx < 0.0) sx = 0.0;
            std::size_t x0 = static_cast<std::size_t>(sx);
            if (x0 > src.width - 1) x0 = src.width - 1;
            const std::size_t x1 = std::min(x0 + 1, src.width - 1);
            const double fx = sx - static_cast<double>(x0);
            for (std::size_t c = 0; c < 3; ++c) {
                const double p00 = src.pixels[(y0 * src.width + x0) * 3 + c];
                const double p01 = src.pixels[(y0 * src.width + x1) * 3 + c];
                const double p10 = src.pixels[(y1 * src.width + x0) * 3 + c];
                const double p11 = src.pixels[(y1 * src.width + x1) * 3 + c];
                const double v = (1.0 - fy) * ((1.0 - fx) * p00 + fx * p01) +
                                 fy * ((1.0 - fx) * p10 + fx * p11);
                dst.pixels[(y * out_w + x) * 3 + c] =
                    static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return dst;
}

Tensor normalize(const RawImage& img) {
    if (img.height != 56 || img.width != 56 || img.pixels.size() != 56 * 56 * 3)
        throw std::invalid_argument("normalize: expected a 56x56 RGB image");
    Tensor t({3, 56, 56});
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 56 * 56; ++i)
            t[c * 56 * 56 + i] =
                static_cast<float>(img.pixels[i * 3 + c]) / 255.0f;
    return t;
}

std::size_t Dataset::count_label(int label) const {
    std::size_t n = 0;
    for (const LabeledImage& s : samples)
        if (s.label == label) ++n;
    return n;
}

Dataset load_directory(const std::string& root) {
    Dataset ds;
    const std::pair<const char*, int> classes[2] = {{"spam", 1}, {"ham", 0}};
    for (const auto& [sub, label] : classes) {
        const fs::path dir = fs::path(root) / sub;
        if (!fs::is_directory(dir))
            throw std::invalid_argument("missing class directory: " + dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end(),
                  [](const fs::path& a, const fs::path& b) {
                      return a.filename().string() < b.filename().string();
                  });
        for (const fs::path& f : files) {
            try {
                RawImage raw = decode_image_auto(read_file(f));
                LabeledImage sample;
                sample.pixels = normalize(resize_bilinear(raw));
                sample.label = label;
                sample.source_id = std::string(sub) + "/" + f.filename().string();
                ds.samples.push_back(std::move(sample));
            } catch (const DecodeError&) {
                ++ds.skipped_files;
            }
        }
    }
    if (ds.samples.empty())
        throw std::runtime_error("no decodable images under " + root);
    return ds;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw std::invalid_argument("train_fraction must be in (0,1)");
    Dataset train, test;
    train.split_tag = SplitTag::train;
    test.split_tag = SplitTag::test;
    train.seed = test.seed = seed;

    Rng rng(seed);
    for (int label : {1, 0}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < ds.samples.size(); ++i)
            if (ds.samples[i].label == label) idx.push_back(i);
        if (idx.empty())
            throw std::invalid_argument(std::string("stratified_split: class '") +
                                        (label == 1 ? "spam" : "ham") + "' is empty");
        rng.shuffle(idx);
        const std::size_t n_train = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(idx.size())));
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_train ? train : test).samples.push_back(ds.samples[idx[k]]);
    }
    return {std::move(train), std::move(test)};
}

std::vector<Batch> batches(const Dataset& ds, std::size_t batch_size, Rng& rng) {
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    std::vector<std::size_t> order(ds.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<Batch> out;
    const std::size_t stride = 3 * 56 * 56;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t b = std::min(batch_size, order.size() - start);
        Batch batch{Tensor({b, 3, 56, 56}), Tensor({b, 1})};
        for (std::size_t k = 0; k < b; ++k) {
            const LabeledImage& s = ds.samples[order[start + k]];
            if (!same_shape(s.pixels.shape(), {3, 56, 56}))
                throw std::invalid_argument("batches: sample " + s.source_id +
                                            " is not 3x56x56");
            std::memcpy(batch.images.data() + k * stride, s.pixels.data(),
                        stride * sizeof(float));
            batch.labels[k] = static_cast<float>(s.label);
        }
        out.push_back(std::move(batch));
    }
    return out;
}

std::uint64_t split_membership_hash(const Dataset& ds) {
    std::vector<std::string> ids;
    ids.reserve(ds.samples.size());
    for (const LabeledImage& s : ds.samples) ids.push_back(s.source_id);
    std::sort(ids.begin(), ids.end());
    // FNV-1a over the sorted ids, newline-separated
    std::uint64_t h = 14695981039346656037ull;
    for (const std::string& id : ids) {
        for (char ch : id) {
            h ^= static_cast<std::uint8_t>(ch);
            h *= 1099511628211ull;
        }
        h ^= static_cast<std::uint8_t>('\n');
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::uint8_t> encode_ppm(const RawImage& img) {
    char header[64];
    const int n = std::snprintf(header, sizeof(header), "P6\n%zu %zu\n255\n",
                                img.width, img.height);
    std::vector<std::uint8_t> out(header, header + n);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

namespace {

std::size_t bin_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return static_cast<std::size_t>(r >> 6) * 16 +
           static_cast<std::size_t>(g >> 6) * 4 + (b >> 6);
}

// max-bin and top-8 mass of the 64-bin color histogram
std::pair<double, double> histogram_profile(const RawImage& img) {
    std::size_t counts[64] = {};
    const std::size_t n = img.height * img.width;
    for (std::size_t i = 0; i < n; ++i)
        ++counts[bin_of(img.pixels[3 * i], img.pixels[3 * i + 1],
                        img.pixels[3 * i + 2])];
    std::sort(counts, counts + 64, std::greater<>());
    std::size_t top8 = 0;
    for (int i = 0; i < 8; ++i) top8 += counts[i];
    return {static_cast<double>(counts[0]) / static_cast<double>(n),
            static_cast<double>(top8) / static_cast<double>(n)};
}

// Quantizer bin centers for 4 levels per channel; colors drawn from these
// land in distinct histogram cells by construction.
constexpr std::uint8_t kLevels[4] = {32, 96, 160, 224};

// Flat light background with dark text-like bar segments: nearly all pixels
// concentrate in two color bins.
RawImage gen_spam_image(Rng& rng) {
    const std::size_t h = 48 + rng.below(49);
    const std::size_t w = 48 + rng.below(49);
    std::uint8_t bg[3], bar[3];
    for (int c = 0; c < 3; ++c) {
        bg[c] = kLevels[2 + rng.below(2)];   // light: 160 or 224
        bar[c] = kLevels[rng.below(2)];      // dark: 32 or 96
    }
    RawImage img{h, w, {}};
    img.pixels.resize(h * w * 3);
    for (std::size_t i = 0; i < h * w; ++i)
        for (int c = 0; c < 3; ++c) img.pixels[3 * i + c] = bg[c];

    std::size_t y = 2 + rng.below(4);
    while (y + 4 < h) {
        const std::size_t th = 3 + rng.below(3);
        std::size_t x = 2 + rng.below(4);
        while (x + 5 < w) {
            const std::size_t seg = 6 + rng.below(10);
            const std::size_t x_end = std::min(x + seg, w - 2);
            const std::size_t y_end = std::min(y + th, h - 2);
            for (std::size_t yy = y; yy < y_end; ++yy)
                for (std::size_t xx = x; xx < x_end; ++xx)
                    for (int c = 0; c < 3; ++c)
                        img.pixels[(yy * w + xx) * 3 + c] = bar[c];
            x = x_end + 2 + rng.below(5);
        }
        y += th + 3 + rng.below(4);
    }
    return img;
}

// Smooth full-range colour waves: each channel is a low-frequency sinusoid
// with its own orientation, period, and phase, plus low-amplitude noise.
// Every channel sweeps all four quantization cells repeatedly, so the mass
// spreads over most of the 64 bins. The accept loop enforces the spread on
// the file and on its 56x56 resize (what the pipeline actually sees).
RawImage gen_ham_image(Rng& rng) {
    constexpr double kPi = 3.14159265358979323846;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const std::size_t h = 48 + rng.below(49);
        const std::size_t w = 48 + rng.below(49);
        double cos_t[3], sin_t[3], freq[3], phase[3], amp[3], base[3];
        for (int c = 0; c < 3; ++c) {
            const double theta = rng.uniform(0.0f, static_cast<float>(kPi));
            cos_t[c] = std::cos(theta);
            sin_t[c] = std::sin(theta);
            freq[c] = rng.uniform(0.8f, 2.0f);
            phase[c] = rng.uniform(0.0f, static_cast<float>(2.0 * kPi));
            amp[c] = rng.uniform(95.0f, 115.0f);
            base[c] = rng.uniform(115.0f, 140.0f);
        }
        RawImage img{h, w, {}};
        img.pixels.resize(h * w * 3);
        for (std::size_t y = 0; y < h; ++y) {
            const double fy = static_cast<double>(y) / static_cast<double>(h - 1);
            for (std::size_t x = 0; x < w; ++x) {
                const double fx = static_cast<double>(x) / static_cast<double>(w - 1);
                for (int c = 0; c < 3; ++c) {
                    const double t =
                        2.0 * kPi * freq[c] * (cos_t[c] * fx + sin_t[c] * fy) + phase[c];
                    const double v = base[c] + amp[c] * std::sin(t);
                    const int noisy = static_cast<int>(std::lround(v)) +
                                      static_cast<int>(rng.below(21)) - 10;
                    img.pixels[(y * w + x) * 3 + c] =
                        static_cast<std::uint8_t>(std::clamp(noisy, 0, 255));
                }
            }
        }
        const auto [max_bin, top8] = histogram_profile(img);
        const auto [max_bin_r, top8_r] = histogram_profile(resize_bilinear(img));
        if (max_bin <= 0.13 && top8 <= 0.45 && max_bin_r <= 0.13 && top8_r <= 0.45)
            return img;
    }
    throw std::runtime_error("ham generation failed to meet spread bounds");
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace

SynthStats generate_synthetic_corpus(std::size_t n_spam, std::size_t n_ham,
                                     std::uint64_t seed,
                                     const std::string& out_dir) {
    if (n_spam == 0 || n_ham == 0)
        throw std::invalid_argument("synthetic corpus needs at least one image per class");
    const fs::path root(out_dir);
    fs::create_directories(root / "spam");
    fs::create_directories(root / "ham");

    std::string manifest;
    SynthStats stats;
    char name[64];
    for (std::size_t i = 0; i < n_spam; ++i) {
        const std::uint64_t file_seed = mix_seed(mix_seed(seed, 1), i);
        Rng rng(file_seed);
        std::snprintf(name, sizeof(name), "spam/spam_%04zu.ppm", i);
        write_file(root / name, encode_ppm(gen_spam_image(rng)));
        manifest += std::string(name) + " 1 " + std::to_string(file_seed) + "\n";
        ++stats.spam_written;
    }
    for (std::size_t i = 0; i < n_ham; ++i) {
        const std::uint64_t file_seed = mix_seed(mix_seed(seed, 0), i);
        Rng rng(file_seed);
        std::snprintf(name, sizeof(name), "ham/ham_%04zu.ppm", i);
        write_file(root / name, encode_ppm(gen_ham_image(rng)));
        manifest += std::string(name) + " 0 " + std::to_string(file_seed) + "\n";
        ++stats.ham_written;
    }
    const fs::path manifest_path = root / "manifest.txt";
    write_file(manifest_path,
               std::vector<std::uint8_t>(manifest.begin(), manifest.end()));
    stats.manifest_path = manifest_path.string();
    return stats;
}

}  // namespace spamnet
