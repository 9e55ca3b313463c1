#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "spamnet/data.hpp"
#include "spamnet/rng.hpp"

using namespace spamnet;
namespace fs = std::filesystem;

namespace {

// --- frozen reference encodings (PIL output, checked in as bytes) ---

const std::vector<std::uint8_t> kRedPng = {
    0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
    0x08, 0x02, 0x00, 0x00, 0x00, 0x90, 0x77, 0x53, 0xDE, 0x00, 0x00, 0x00,
    0x0C, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0xF8, 0xCF, 0xC0, 0x00,
    0x00, 0x03, 0x01, 0x01, 0x00, 0xC9, 0xFE, 0x92, 0xEF, 0x00, 0x00, 0x00,
    0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82,
};

const std::vector<std::uint8_t> kGrayPng = {
    0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
    0x08, 0x00, 0x00, 0x00, 0x00, 0x57, 0xDD, 0x52, 0xF8, 0x00, 0x00, 0x00,
    0x0E, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x60, 0x08, 0x65, 0x58,
    0xF5, 0x1F, 0x00, 0x03, 0xAD, 0x01, 0xFF, 0x67, 0xFB, 0xCA, 0x09, 0x00,
    0x00, 0x00, 0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42, 0x60, 0x82,
};

const std::vector<std::uint8_t> kAlphaPng = {
    0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A, 0x00, 0x00, 0x00, 0x0D,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01,
    0x08, 0x06, 0x00, 0x00, 0x00, 0xF4, 0x22, 0x7F, 0x8A, 0x00, 0x00, 0x00,
    0x11, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9C, 0x63, 0x60, 0x60, 0xF8, 0xFF,
    0x9F, 0x81, 0x81, 0x81, 0x01, 0x00, 0x0A, 0xFE, 0x01, 0xFF, 0xB8, 0xE3,
    0x3E, 0x8C, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4E, 0x44, 0xAE, 0x42,
    0x60, 0x82,
};

const std::vector<std::uint8_t> kGrayJpeg = {
    0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, 0x4A, 0x46, 0x49, 0x46, 0x00, 0x01,
    0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00, 0xFF, 0xDB, 0x00, 0x43,
    0x00, 0x02, 0x01, 0x01, 0x01, 0x01, 0x01, 0x02, 0x01, 0x01, 0x01, 0x02,
    0x02, 0x02, 0x02, 0x02, 0x04, 0x03, 0x02, 0x02, 0x02, 0x02, 0x05, 0x04,
    0x04, 0x03, 0x04, 0x06, 0x05, 0x06, 0x06, 0x06, 0x05, 0x06, 0x06, 0x06,
    0x07, 0x09, 0x08, 0x06, 0x07, 0x09, 0x07, 0x06, 0x06, 0x08, 0x0B, 0x08,
    0x09, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x06, 0x08, 0x0B, 0x0C, 0x0B, 0x0A,
    0x0C, 0x09, 0x0A, 0x0A, 0x0A, 0xFF, 0xDB, 0x00, 0x43, 0x01, 0x02, 0x02,
    0x02, 0x02, 0x02, 0x02, 0x05, 0x03, 0x03, 0x05, 0x0A, 0x07, 0x06, 0x07,
    0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A,
    0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A,
    0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A,
    0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A,
    0x0A, 0x0A, 0xFF, 0xC0, 0x00, 0x11, 0x08, 0x00, 0x08, 0x00, 0x08, 0x03,
    0x01, 0x22, 0x00, 0x02, 0x11, 0x01, 0x03, 0x11, 0x01, 0xFF, 0xC4, 0x00,
    0x1F, 0x00, 0x00, 0x01, 0x05, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x02, 0x03, 0x04, 0x05,
    0x06, 0x07, 0x08, 0x09, 0x0A, 0x0B, 0xFF, 0xC4, 0x00, 0xB5, 0x10, 0x00,
    0x02, 0x01, 0x03, 0x03, 0x02, 0x04, 0x03, 0x05, 0x05, 0x04, 0x04, 0x00,
    0x00, 0x01, 0x7D, 0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21,
    0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81,
    0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24,
    0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25,
    0x26, 0x27, 0x28, 0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A,
    0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56,
    0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A,
    0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86,
    0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
    0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3,
    0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6,
    0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9,
    0xDA, 0xE1, 0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1,
    0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA, 0xFF, 0xC4, 0x00,
    0x1F, 0x01, 0x00, 0x03, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01,
    0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x02, 0x03, 0x04, 0x05,
    0x06, 0x07, 0x08, 0x09, 0x0A, 0x0B, 0xFF, 0xC4, 0x00, 0xB5, 0x11, 0x00,
    0x02, 0x01, 0x02, 0x04, 0x04, 0x03, 0x04, 0x07, 0x05, 0x04, 0x04, 0x00,
    0x01, 0x02, 0x77, 0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31,
    0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08,
    0x14, 0x42, 0x91, 0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0, 0x15,
    0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18,
    0x19, 0x1A, 0x26, 0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39,
    0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55,
    0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
    0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x82, 0x83, 0x84,
    0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97,
    0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA,
    0xB2, 0xB3, 0xB4, 0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4,
    0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7,
    0xD8, 0xD9, 0xDA, 0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA,
    0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA, 0xFF, 0xDA, 0x00,
    0x0C, 0x03, 0x01, 0x00, 0x02, 0x11, 0x03, 0x11, 0x00, 0x3F, 0x00, 0xE7,
    0xE8, 0xA2, 0x8A, 0x00, 0xFF, 0xD9,
};

const std::vector<std::uint8_t> kLJpeg = {
    0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, 0x4A, 0x46, 0x49, 0x46, 0x00, 0x01,
    0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00, 0xFF, 0xDB, 0x00, 0x43,
    0x00, 0x02, 0x01, 0x01, 0x01, 0x01, 0x01, 0x02, 0x01, 0x01, 0x01, 0x02,
    0x02, 0x02, 0x02, 0x02, 0x04, 0x03, 0x02, 0x02, 0x02, 0x02, 0x05, 0x04,
    0x04, 0x03, 0x04, 0x06, 0x05, 0x06, 0x06, 0x06, 0x05, 0x06, 0x06, 0x06,
    0x07, 0x09, 0x08, 0x06, 0x07, 0x09, 0x07, 0x06, 0x06, 0x08, 0x0B, 0x08,
    0x09, 0x0A, 0x0A, 0x0A, 0x0A, 0x0A, 0x06, 0x08, 0x0B, 0x0C, 0x0B, 0x0A,
    0x0C, 0x09, 0x0A, 0x0A, 0x0A, 0xFF, 0xC0, 0x00, 0x0B, 0x08, 0x00, 0x08,
    0x00, 0x08, 0x01, 0x01, 0x11, 0x00, 0xFF, 0xC4, 0x00, 0x1F, 0x00, 0x00,
    0x01, 0x05, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08,
    0x09, 0x0A, 0x0B, 0xFF, 0xC4, 0x00, 0xB5, 0x10, 0x00, 0x02, 0x01, 0x03,
    0x03, 0x02, 0x04, 0x03, 0x05, 0x05, 0x04, 0x04, 0x00, 0x00, 0x01, 0x7D,
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
    0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
    0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75,
    0x76, 0x77, 0x78, 0x79, 0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3,
    0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9,
    0xCA, 0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
    0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4,
    0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA, 0xFF, 0xDA, 0x00, 0x08, 0x01, 0x01,
    0x00, 0x00, 0x3F, 0x00, 0xFD, 0x20, 0xAF, 0xFF, 0xD9,
};

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("spamnet_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(b.data()),
              static_cast<std::streamsize>(b.size()));
}

LabeledImage dummy_sample(int label, const std::string& id) {
    return LabeledImage{zeros({3, 56, 56}), label, id};
}

}  // namespace

TEST_CASE("ppm P6 decodes known bytes exactly") {
    std::string ppm = "P6\n2 2\n255\n";
    const std::uint8_t px[12] = {255, 0, 0, 0, 255, 0, 0, 0, 255, 10, 20, 30};
    std::vector<std::uint8_t> data = bytes_of(ppm);
    data.insert(data.end(), px, px + 12);

    RawImage img = decode_image(data, ImageFormat::ppm);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    REQUIRE(img.pixels.size() == 12);
    for (int i = 0; i < 12; ++i) CHECK(img.pixels[i] == px[i]);
}

TEST_CASE("ppm P5 grayscale replicates channels") {
    std::string ppm = "P5\n3 1\n255\n";
    const std::uint8_t px[3] = {0, 128, 255};
    std::vector<std::uint8_t> data = bytes_of(ppm);
    data.insert(data.end(), px, px + 3);

    RawImage img = decode_image(data, ImageFormat::ppm);
    REQUIRE(img.pixels.size() == 9);
    for (int i = 0; i < 3; ++i) {
        CHECK(img.pixels[3 * i] == px[i]);
        CHECK(img.pixels[3 * i + 1] == px[i]);
        CHECK(img.pixels[3 * i + 2] == px[i]);
    }
}

TEST_CASE("ppm header comments are skipped") {
    std::string ppm = "P6\n# a comment\n1 # inline\n1\n255\n";
    std::vector<std::uint8_t> data = bytes_of(ppm);
    data.push_back(9);
    data.push_back(8);
    data.push_back(7);
    RawImage img = decode_image(data, ImageFormat::ppm);
    CHECK(img.width == 1);
    CHECK(img.pixels[0] == 9);
}

TEST_CASE("ppm malformed inputs raise DecodeError") {
    CHECK_THROWS_AS(decode_image(bytes_of("P6\n2 2\n255\nxy"), ImageFormat::ppm),
                    DecodeError);  // truncated payload
    CHECK_THROWS_AS(decode_image(bytes_of("P3\n1 1\n255\n1 2 3"), ImageFormat::ppm),
                    DecodeError);  // ascii variant unsupported
    CHECK_THROWS_AS(decode_image(bytes_of("P6\n1 1\n65535\n..."), ImageFormat::ppm),
                    DecodeError);  // 16-bit
    CHECK_THROWS_AS(decode_image(bytes_of("garbage"), ImageFormat::ppm), DecodeError);
}

TEST_CASE("png 1x1 red decodes to (255,0,0)") {
    RawImage img = decode_image(kRedPng, ImageFormat::png);
    CHECK(img.width == 1);
    CHECK(img.height == 1);
    REQUIRE(img.pixels.size() == 3);
    CHECK(img.pixels[0] == 255);
    CHECK(img.pixels[1] == 0);
    CHECK(img.pixels[2] == 0);
}

TEST_CASE("grayscale png replicates channels") {
    RawImage img = decode_image(kGrayPng, ImageFormat::png);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    const std::uint8_t want[4] = {0, 85, 170, 255};
    for (int i = 0; i < 4; ++i) {
        CHECK(img.pixels[3 * i] == want[i]);
        CHECK(img.pixels[3 * i + 1] == want[i]);
        CHECK(img.pixels[3 * i + 2] == want[i]);
    }
}

TEST_CASE("transparent png pixels composite against white") {
    RawImage img = decode_image(kAlphaPng, ImageFormat::png);
    REQUIRE(img.pixels.size() == 6);
    CHECK(img.pixels[0] == 0);  // opaque blue survives
    CHECK(img.pixels[1] == 0);
    CHECK(img.pixels[2] == 255);
    CHECK(img.pixels[3] == 255);  // fully transparent -> white
    CHECK(img.pixels[4] == 255);
    CHECK(img.pixels[5] == 255);
}

TEST_CASE("corrupt png raises DecodeError") {
    std::vector<std::uint8_t> bad = kRedPng;
    bad.resize(20);
    CHECK_THROWS_AS(decode_image(bad, ImageFormat::png), DecodeError);
}

TEST_CASE("jpeg solid gray decodes near the encoded value") {
    RawImage img = decode_image(kGrayJpeg, ImageFormat::jpeg);
    CHECK(img.width == 8);
    CHECK(img.height == 8);
    REQUIRE(img.pixels.size() == 8 * 8 * 3);
    for (std::uint8_t v : img.pixels) {
        CHECK(v >= 117);
        CHECK(v <= 123);
    }
}

TEST_CASE("grayscale-mode jpeg replicates channels") {
    RawImage img = decode_image(kLJpeg, ImageFormat::jpeg);
    REQUIRE(img.pixels.size() == 8 * 8 * 3);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(img.pixels[3 * i] == img.pixels[3 * i + 1]);
        CHECK(img.pixels[3 * i + 1] == img.pixels[3 * i + 2]);
        CHECK(img.pixels[3 * i] >= 197);
        CHECK(img.pixels[3 * i] <= 203);
    }
}

TEST_CASE("corrupt jpeg raises DecodeError instead of aborting") {
    std::vector<std::uint8_t> bad = kGrayJpeg;
    bad.resize(40);
    CHECK_THROWS_AS(decode_image(bad, ImageFormat::jpeg), DecodeError);
}

TEST_CASE("format detection by magic bytes") {
    CHECK(detect_format(kRedPng) == ImageFormat::png);
    CHECK(detect_format(kGrayJpeg) == ImageFormat::jpeg);
    CHECK(detect_format(bytes_of("P6\n1 1\n255\nabc")) == ImageFormat::ppm);
    CHECK(detect_format(bytes_of("P5\n1 1\n255\na")) == ImageFormat::ppm);
    CHECK(detect_format(bytes_of("hello world")) == ImageFormat::unknown);
    CHECK_THROWS_AS(decode_image_auto(bytes_of("not an image")), DecodeError);
}

TEST_CASE("resize keeps constant images constant") {
    RawImage src{13, 31, std::vector<std::uint8_t>(13 * 31 * 3)};
    for (std::size_t i = 0; i < src.pixels.size(); i += 3) {
        src.pixels[i] = 40;
        src.pixels[i + 1] = 90;
        src.pixels[i + 2] = 200;
    }
    RawImage dst = resize_bilinear(src);
    CHECK(dst.height == 56);
    CHECK(dst.width == 56);
    for (std::size_t i = 0; i < dst.pixels.size(); i += 3) {
        CHECK(dst.pixels[i] == 40);
        CHECK(dst.pixels[i + 1] == 90);
        CHECK(dst.pixels[i + 2] == 200);
    }
}

TEST_CASE("resize of a 56x56 input is the identity") {
    Rng rng(11);
    RawImage src{56, 56, std::vector<std::uint8_t>(56 * 56 * 3)};
    for (auto& p : src.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    RawImage dst = resize_bilinear(src);
    CHECK(dst.pixels == src.pixels);
}

TEST_CASE("downscale by 2 matches the 2x2 box average within one step") {
    Rng rng(12);
    RawImage src{112, 112, std::vector<std::uint8_t>(112 * 112 * 3)};
    for (std::size_t y = 0; y < 112; ++y)
        for (std::size_t x = 0; x < 112; ++x) {
            const std::uint8_t v = ((y / 4 + x / 4) % 2) ? 255 : 0;  // checkerboard
            for (int c = 0; c < 3; ++c) src.pixels[(y * 112 + x) * 3 + c] = v;
        }
    RawImage dst = resize_bilinear(src);
    for (std::size_t y = 0; y < 56; ++y)
        for (std::size_t x = 0; x < 56; ++x)
            for (int c = 0; c < 3; ++c) {
                int sum = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx)
                        sum += src.pixels[((2 * y + dy) * 112 + 2 * x + dx) * 3 + c];
                const double avg = sum / 4.0;
                const double got = dst.pixels[(y * 56 + x) * 3 + c];
                CHECK(std::abs(got - avg) <= 1.0);
            }
}

TEST_CASE("normalize maps endpoints and transposes to channels-first") {
    RawImage img{56, 56, std::vector<std::uint8_t>(56 * 56 * 3)};
    img.pixels[0] = 0;    // R of pixel (0,0)
    img.pixels[1] = 128;  // G
    img.pixels[2] = 255;  // B
    img.pixels[(7 * 56 + 3) * 3 + 1] = 51;  // G of pixel (7,3)
    Tensor t = normalize(img);
    REQUIRE(same_shape(t.shape(), {3, 56, 56}));
    CHECK(t[0] == 0.0f);
    CHECK(t[56 * 56] == doctest::Approx(128.0f / 255.0f));
    CHECK(t[2 * 56 * 56] == 1.0f);
    CHECK(t[56 * 56 + 7 * 56 + 3] == doctest::Approx(51.0f / 255.0f));

    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t[i] >= 0.0f);
        CHECK(t[i] <= 1.0f);
    }
}

TEST_CASE("normalize round-trips to the original bytes") {
    Rng rng(13);
    RawImage img{56, 56, std::vector<std::uint8_t>(56 * 56 * 3)};
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    Tensor t = normalize(img);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 56 * 56; ++i) {
            const int back = static_cast<int>(std::lround(t[c * 56 * 56 + i] * 255.0f));
            CHECK(back == img.pixels[i * 3 + c]);
        }
}

TEST_CASE("load_directory labels, sorts, and skips undecodable files") {
    TempDir tmp("load");
    fs::create_directories(tmp.path / "spam");
    fs::create_directories(tmp.path / "ham");

    std::string ppm = "P6\n2 2\n255\n";
    std::vector<std::uint8_t> good = bytes_of(ppm);
    good.resize(good.size() + 12, 100);

    write_bytes(tmp.path / "spam" / "b.ppm", good);
    write_bytes(tmp.path / "spam" / "a.ppm", good);
    write_bytes(tmp.path / "spam" / "c.ppm", good);
    write_bytes(tmp.path / "ham" / "x.ppm", good);
    write_bytes(tmp.path / "ham" / "broken.bin", bytes_of("not an image at all"));

    Dataset ds = load_directory(tmp.path.string());
    CHECK(ds.samples.size() == 4);
    CHECK(ds.skipped_files == 1);
    CHECK(ds.count_label(1) == 3);
    CHECK(ds.count_label(0) == 1);
    // sorted order within each class, spam first
    CHECK(ds.samples[0].source_id == "spam/a.ppm");
    CHECK(ds.samples[1].source_id == "spam/b.ppm");
    CHECK(ds.samples[2].source_id == "spam/c.ppm");
    CHECK(ds.samples[3].source_id == "ham/x.ppm");
    CHECK(same_shape(ds.samples[0].pixels.shape(), {3, 56, 56}));
}

TEST_CASE("load_directory error cases") {
    TempDir tmp("loaderr");
    CHECK_THROWS_AS(load_directory(tmp.path.string()), std::invalid_argument);

    fs::create_directories(tmp.path / "spam");
    fs::create_directories(tmp.path / "ham");
    CHECK_THROWS_AS(load_directory(tmp.path.string()), std::runtime_error);
}

TEST_CASE("stratified split reproduces the target class arithmetic") {
    Dataset ds;
    for (int i = 0; i < 928; ++i) ds.samples.push_back(dummy_sample(1, "s" + std::to_string(i)));
    for (int i = 0; i < 810; ++i) ds.samples.push_back(dummy_sample(0, "h" + std::to_string(i)));

    auto [train, test] = stratified_split(ds, 0.8, 42);
    CHECK(train.count_label(1) == 742);
    CHECK(train.count_label(0) == 648);
    CHECK(test.count_label(1) == 186);
    CHECK(test.count_label(0) == 162);
    CHECK(train.split_tag == SplitTag::train);
    CHECK(test.split_tag == SplitTag::test);
}

TEST_CASE("stratified split is disjoint, exhaustive, seed-stable") {
    Dataset ds;
    for (int i = 0; i < 10; ++i) ds.samples.push_back(dummy_sample(1, "s" + std::to_string(i)));
    for (int i = 0; i < 10; ++i) ds.samples.push_back(dummy_sample(0, "h" + std::to_string(i)));

    auto [tr1, te1] = stratified_split(ds, 0.8, 7);
    CHECK(tr1.samples.size() == 16);
    CHECK(te1.samples.size() == 4);

    std::set<std::string> seen;
    for (const auto& s : tr1.samples) seen.insert(s.source_id);
    for (const auto& s : te1.samples) seen.insert(s.source_id);
    CHECK(seen.size() == 20);  // disjoint and exhaustive

    auto [tr2, te2] = stratified_split(ds, 0.8, 7);
    CHECK(split_membership_hash(te1) == split_membership_hash(te2));

    // different seeds give a different membership at n = 20
    bool any_diff = false;
    for (std::uint64_t s = 8; s < 16 && !any_diff; ++s) {
        auto [tr3, te3] = stratified_split(ds, 0.8, s);
        any_diff = split_membership_hash(te3) != split_membership_hash(te1);
    }
    CHECK(any_diff);
}

TEST_CASE("stratified split rejects an empty class") {
    Dataset ds;
    for (int i = 0; i < 5; ++i) ds.samples.push_back(dummy_sample(1, "s" + std::to_string(i)));
    CHECK_THROWS_AS(stratified_split(ds, 0.8, 1), std::invalid_argument);
    CHECK_THROWS_AS(stratified_split(ds, 1.5, 1), std::invalid_argument);
}

TEST_CASE("batches cover the dataset once with the final partial kept") {
    Dataset ds;
    for (int i = 0; i < 70; ++i)
        ds.samples.push_back(dummy_sample(i % 2, "img" + std::to_string(i)));
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        ds.samples[i].pixels[0] = static_cast<float>(i);  // identify samples by pixel

    Rng rng(3);
    std::vector<Batch> bs = batches(ds, 32, rng);
    REQUIRE(bs.size() == 3);
    CHECK(bs[0].images.dim(0) == 32);
    CHECK(bs[1].images.dim(0) == 32);
    CHECK(bs[2].images.dim(0) == 6);

    std::set<int> members;
    for (const Batch& b : bs)
        for (std::size_t k = 0; k < b.images.dim(0); ++k)
            members.insert(static_cast<int>(b.images[k * 3 * 56 * 56]));
    CHECK(members.size() == 70);

    Rng rng2(3);
    std::vector<Batch> again = batches(ds, 32, rng2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < again[i].images.dim(0); ++k)
            CHECK(again[i].images[k * 3 * 56 * 56] == bs[i].images[k * 3 * 56 * 56]);

    CHECK_THROWS_AS(batches(ds, 0, rng), std::invalid_argument);
}

TEST_CASE("membership hash ignores order, reflects content") {
    Dataset a, b, c;
    a.samples = {dummy_sample(1, "x"), dummy_sample(0, "y")};
    b.samples = {dummy_sample(0, "y"), dummy_sample(1, "x")};
    c.samples = {dummy_sample(1, "x"), dummy_sample(0, "z")};
    CHECK(split_membership_hash(a) == split_membership_hash(b));
    CHECK(split_membership_hash(a) != split_membership_hash(c));
}

TEST_CASE("synthetic corpus: counts, manifest, histogram contracts") {
    TempDir tmp("synth");
    SynthStats stats = generate_synthetic_corpus(6, 6, 1, tmp.path.string());
    CHECK(stats.spam_written == 6);
    CHECK(stats.ham_written == 6);

    std::ifstream manifest(stats.manifest_path);
    REQUIRE(manifest.good());
    std::string line;
    std::size_t lines = 0, spam_lines = 0;
    while (std::getline(manifest, line)) {
        ++lines;
        if (line.find(" 1 ") != std::string::npos) ++spam_lines;
    }
    CHECK(lines == 12);
    CHECK(spam_lines == 6);

    // histogram contracts, on the files as written (naive recount)
    for (int i = 0; i < 6; ++i) {
        char spam_name[64], ham_name[64];
        std::snprintf(spam_name, sizeof(spam_name), "spam/spam_%04d.ppm", i);
        std::snprintf(ham_name, sizeof(ham_name), "ham/ham_%04d.ppm", i);

        for (int which = 0; which < 2; ++which) {
            const fs::path p = tmp.path / (which == 0 ? spam_name : ham_name);
            std::ifstream in(p, std::ios::binary);
            REQUIRE(in.good());
            std::vector<std::uint8_t> bytes(
                (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            RawImage img = decode_image(bytes, ImageFormat::ppm);

            std::size_t counts[64] = {};
            const std::size_t n = img.height * img.width;
            for (std::size_t px = 0; px < n; ++px)
                ++counts[(img.pixels[3 * px] >> 6) * 16 +
                         (img.pixels[3 * px + 1] >> 6) * 4 +
                         (img.pixels[3 * px + 2] >> 6)];
            std::sort(counts, counts + 64, std::greater<>());
            std::size_t top8 = 0;
            for (int k = 0; k < 8; ++k) top8 += counts[k];

            if (which == 0) {
                // spam: >=60% of pixels within the top 8 bins
                CHECK(static_cast<double>(top8) >= 0.6 * static_cast<double>(n));
            } else {
                // ham: no single bin above 15%
                CHECK(static_cast<double>(counts[0]) <= 0.15 * static_cast<double>(n));
            }
        }
    }
}

TEST_CASE("synthetic corpus is byte-identical across reruns") {
    TempDir a("synth_a"), b("synth_b");
    generate_synthetic_corpus(4, 4, 99, a.path.string());
    generate_synthetic_corpus(4, 4, 99, b.path.string());

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a.path)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), a.path);
        std::ifstream fa(entry.path(), std::ios::binary);
        std::ifstream fb(b.path / rel, std::ios::binary);
        REQUIRE(fb.good());
        std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
        std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
        CHECK(ca == cb);
        ++compared;
    }
    CHECK(compared == 9);  // 8 images + manifest

    CHECK_THROWS_AS(generate_synthetic_corpus(0, 4, 1, a.path.string()),
                    std::invalid_argument);
}

TEST_CASE("synthetic corpus round-trips through load_directory") {
    TempDir tmp("synth_load");
    generate_synthetic_corpus(3, 2, 5, tmp.path.string());
    Dataset ds = load_directory(tmp.path.string());
    CHECK(ds.samples.size() == 5);
    CHECK(ds.count_label(1) == 3);
    CHECK(ds.count_label(0) == 2);
    CHECK(ds.skipped_files == 0);  // the manifest sits outside the class dirs
}
