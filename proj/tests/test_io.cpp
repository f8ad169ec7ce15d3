#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "smsfp/image_io.hpp"

using namespace smsfp;

namespace {
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("smsfp_io_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};
}  // namespace

TEST_CASE("PFM: float32 round trip, gray and 3-channel") {
    TempDir dir;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    RasterF img(17, 9);
    for (std::size_t k = 0; k < img.size(); ++k)
        img[k] = static_cast<float>(u(rng));  // representable in float32

    write_pfm(dir.file("a.pfm"), img);
    const RasterF back = read_pfm(dir.file("a.pfm"));
    REQUIRE(back.width() == 17);
    REQUIRE(back.height() == 9);
    CHECK(back == img);

    NormalMap nm(7, 5);
    for (std::size_t k = 0; k < nm.nx.size(); ++k) {
        nm.nx[k] = 0.25f;
        nm.ny[k] = static_cast<float>(k) / 64.0;
        nm.nz[k] = 1.0f;
    }
    write_normal_pfm(dir.file("n.pfm"), nm);
    const NormalMap nback = read_normal_pfm(dir.file("n.pfm"));
    CHECK(nback.nx == nm.nx);
    CHECK(nback.ny == nm.ny);
    CHECK(nback.nz == nm.nz);
}

TEST_CASE("PNG: 16-bit gray round trip and mask semantics") {
    TempDir dir;
    Raster<std::uint16_t> img(23, 11);
    for (std::size_t k = 0; k < img.size(); ++k)
        img[k] = static_cast<std::uint16_t>((k * 2654435761u) % 65536);
    write_png_gray16(dir.file("g16.png"), img);
    const RasterF gray = read_png_gray(dir.file("g16.png"));
    REQUIRE(gray.width() == 23);
    for (std::size_t k = 0; k < img.size(); ++k)
        CHECK(gray[k] == doctest::Approx(img[k] / 65535.0).epsilon(1e-12));

    MaskRaster mask(9, 9, 0);
    mask.at(4, 4) = 1;
    mask.at(0, 8) = 1;
    write_png_mask(dir.file("m.png"), mask);
    const MaskRaster mback = read_png_mask(dir.file("m.png"));
    CHECK(mback == mask);
}

TEST_CASE("PNG: 8-bit gray values are linearized by 255") {
    TempDir dir;
    RasterF img(4, 4);
    for (std::size_t k = 0; k < img.size(); ++k) img[k] = (k % 2) ? 1.0 : 0.0;
    write_png_gray8(dir.file("g8.png"), img);
    const RasterF back = read_png_gray(dir.file("g8.png"));
    for (std::size_t k = 0; k < img.size(); ++k) CHECK(back[k] == doctest::Approx(img[k]));
}

TEST_CASE("PFM reader rejects malformed input") {
    TempDir dir;
    write_text_atomic(dir.file("bad.pfm"), "P5\n4 4\n255\n");
    CHECK_THROWS_AS(read_pfm(dir.file("bad.pfm")), std::invalid_argument);
    write_text_atomic(dir.file("trunc.pfm"), "Pf\n8 8\n-1.0\nshort");
    CHECK_THROWS_AS(read_pfm(dir.file("trunc.pfm")), std::invalid_argument);
    CHECK_THROWS_AS(read_pfm(dir.file("missing.pfm")), std::invalid_argument);
}

TEST_CASE("atomic text write replaces the file completely") {
    TempDir dir;
    write_text_atomic(dir.file("t.txt"), "first version, quite long to notice truncation\n");
    write_text_atomic(dir.file("t.txt"), "second\n");
    std::ifstream in(dir.file("t.txt"));
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(contents == "second\n");
    CHECK_FALSE(std::filesystem::exists(dir.file("t.txt.tmp")));
}

TEST_CASE("normal PNG encoding is (n+1)/2") {
    TempDir dir;
    NormalMap nm(3, 3);  // all [0,0,1]
    const MaskRaster mask(3, 3, 1);
    write_normal_png(dir.file("n.png"), nm, mask);
    CHECK(std::filesystem::exists(dir.file("n.png")));
}
