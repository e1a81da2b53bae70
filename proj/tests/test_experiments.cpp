#include "coae/experiments.hpp"
#include "coae/trainer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace coae;

namespace {

AeModel untrained(std::size_t n) {
    Rng rng(3);
    return AeModel::initialize({n, PowerNormalization::per_batch}, rng);
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST(RequiredOsnr, HandCase) {
    const std::vector<CurvePoint> c{{10, 1e-2, 100000}, {12, 1e-3, 100000}};
    const auto r = required_osnr(c, 3.8e-3);
    ASSERT_TRUE(r.has_value());
    EXPECT_NEAR(*r, 10.84, 0.01);
    EXPECT_NEAR(*r, 10.0 + 2.0 * (std::log10(3.8e-3) + 2.0) / -1.0, 1e-12);
}

TEST(RequiredOsnr, NeverReached) {
    const std::vector<CurvePoint> c{{10, 1e-1, 1000}, {12, 5e-2, 1000}, {14, 1e-2, 1000}};
    EXPECT_FALSE(required_osnr(c, 3.8e-3).has_value());
}

TEST(RequiredOsnr, ExactGridPoint) {
    const std::vector<CurvePoint> c{{10, 1e-2, 1000}, {12, 3.8e-3, 1000}, {14, 1e-4, 1000}};
    EXPECT_DOUBLE_EQ(*required_osnr(c, 3.8e-3), 12.0);
}

TEST(RequiredOsnr, FirstPointAlreadyBelow) {
    const std::vector<CurvePoint> c{{10, 1e-4, 1000}, {12, 1e-5, 1000}};
    EXPECT_DOUBLE_EQ(*required_osnr(c, 3.8e-3), 10.0);
}

TEST(RequiredOsnr, ZeroErrorPointStandsInAtOneThirdBit) {
    const std::vector<CurvePoint> c{{10, 1e-2, 1000}, {12, 0.0, 1000}};
    const double floor_ber = 1.0 / 3000.0;
    const double expected =
        10.0 + 2.0 * (std::log10(3.8e-3) + 2.0) / (std::log10(floor_ber) + 2.0);
    EXPECT_NEAR(*required_osnr(c, 3.8e-3), expected, 1e-12);
}

TEST(RequiredOsnr, RejectsBadInput) {
    const std::vector<CurvePoint> one{{10, 1e-2, 10}};
    EXPECT_THROW(required_osnr(one, 3.8e-3), std::invalid_argument);
    const std::vector<CurvePoint> unsorted{{12, 1e-2, 10}, {10, 1e-3, 10}};
    EXPECT_THROW(required_osnr(unsorted, 3.8e-3), std::invalid_argument);
}

TEST(RequiredOsnr, LoweringBerNeverRaisesRequirement) {
    Rng rng(4);
    std::uniform_real_distribution<double> lg(-5.0, -1.0), shrink(0.1, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<CurvePoint> c;
        double ber = std::pow(10.0, lg(rng) + 1.0);
        for (int i = 0; i < 6; ++i) {
            c.push_back({10.0 + 2 * i, std::min(ber, 0.5), 100000});
            ber *= shrink(rng);
        }
        std::vector<CurvePoint> better = c;
        const double factor = shrink(rng);
        for (auto& p : better) p.ber *= factor;
        const auto a = required_osnr(c, 3.8e-3);
        const auto b = required_osnr(better, 3.8e-3);
        if (a) {
            ASSERT_TRUE(b.has_value());
            EXPECT_LE(*b, *a + 1e-12);
        }
    }
}

TEST(Tags, LinewidthTags) {
    EXPECT_EQ(linewidth_tag(10e3), "10k");
    EXPECT_EQ(linewidth_tag(100e3), "100k");
    EXPECT_EQ(linewidth_tag(1e6), "1M");
    EXPECT_EQ(linewidth_tag(2e6), "2M");
    EXPECT_EQ(linewidth_tag(0), "0");
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(DatFiles, LossTable) {
    const std::vector<LossSeries> one{{"10k", {0.5, 0.25}}};
    const auto text = format_loss_dat(one);
    const auto lines = lines_of(text);
    ASSERT_EQ(lines.size(), 3u);
    EXPECT_EQ(lines[0], "e 10k");
    EXPECT_EQ(lines[1], "1 0.5");
    EXPECT_EQ(lines[2], "2 0.25");

    const std::vector<LossSeries> two{{"10k", {0.5, 0.25, 0.125}}, {"100k", {0.75}}};
    const auto l2 = lines_of(format_loss_dat(two));
    EXPECT_EQ(l2[0], "e 10k 100k");
    EXPECT_EQ(l2[3], "3 0.125 nan");
    EXPECT_EQ(format_loss_dat(two), format_loss_dat(two));
}

TEST(Sweep, SinglePointEqualsMeasureBer) {
    const auto model = untrained(8);
    SweepSpec spec;
    spec.linewidths_hz = {100e3};
    spec.osnr_db = {20.0};
    spec.stop = {4000, 8000, 50};
    spec.seed = 9;
    const auto result = ber_osnr_sweep(model, spec);
    ASSERT_EQ(result.points.size(), 1u);

    ChannelConfig ch;
    ch.phase.linewidth_hz = 100e3;
    ch.phase.symbol_period_s = 1.0 / 32e9;
    ch.osnr_db = 20.0;
    Rng rng = make_rng(9, {stream::sweep, 0, 0});
    const auto direct = measure_ber(model, ch, spec.stop, rng);
    EXPECT_EQ(result.points[0].bits, direct.bits);
    EXPECT_EQ(result.points[0].errors, direct.errors);

    const auto lines = lines_of(format_ber_dat(result));
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "OSNR 100k");
}

TEST(Sweep, StopRuleAndInvariants) {
    const auto model = untrained(8);
    SweepSpec spec;
    spec.linewidths_hz = {10e3, 1e6};
    spec.osnr_db = {10.0, 30.0};
    spec.stop = {1000, 20000, 100};
    const auto r = ber_osnr_sweep(model, spec);
    for (const auto& p : r.points) {
        EXPECT_LE(p.errors, p.bits);
        EXPECT_EQ(p.ber, double(p.errors) / double(p.bits));
        EXPECT_GE(p.bits, spec.stop.min_bits);
        EXPECT_LE(p.bits, spec.stop.max_bits);
        EXPECT_TRUE(p.errors >= spec.stop.target_errors || p.bits >= spec.stop.max_bits);
    }
}

TEST(Sweep, ReproducibleAndThreadIndependent) {
    const auto model = untrained(8);
    SweepSpec spec;
    spec.linewidths_hz = {10e3, 100e3, 1e6};
    spec.osnr_db = {12.0, 18.0};
    spec.stop = {2000, 6000, 30};
    spec.seed = 4;
    const auto a = ber_osnr_sweep(model, spec);
    spec.threads = 3;
    const auto b = ber_osnr_sweep(model, spec);
    EXPECT_EQ(format_ber_dat(a), format_ber_dat(b));
    EXPECT_EQ(format_sweep_json(a, "x"), format_sweep_json(b, "x"));
}

TEST(Sweep, TableShapes) {
    const auto model = untrained(8);
    SweepSpec spec;  // default: the seven table linewidths
    spec.osnr_db = {14.0, 16.0, 18.0};
    spec.stop = {1000, 2000, 10};
    const auto r = ber_osnr_sweep(model, spec);
    const auto lines = lines_of(format_ber_dat(r));
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "OSNR 10k 100k 200k 500k 1M 2M 3M");

    const std::vector<TaggedSweep> tagged{{"10k", &r}, {"100k", &r}};
    const auto lw = lines_of(format_lw_dat(tagged));
    EXPECT_EQ(lw[0], "lw 10k 100k");
    EXPECT_EQ(lw.size(), 8u);
}

TEST(Sweep, RejectsBadSpec) {
    const auto model = untrained(8);
    SweepSpec spec;
    spec.osnr_db = {};
    EXPECT_THROW(ber_osnr_sweep(model, spec), std::invalid_argument);
    spec.osnr_db = {20, 10};
    EXPECT_THROW(ber_osnr_sweep(model, spec), std::invalid_argument);
}

TEST(DatFiles, WriteIsByteIdentical) {
    const std::vector<LossSeries> s{{"10k", {0.1, 0.2 + 0.1}}};
    const auto dir = std::filesystem::temp_directory_path() / "coae_dat_test";
    std::filesystem::create_directories(dir);
    write_text_file(dir / "a.dat", format_loss_dat(s));
    write_text_file(dir / "b.dat", format_loss_dat(s));
    EXPECT_EQ(read_file(dir / "a.dat"), read_file(dir / "b.dat"));
    EXPECT_NE(read_file(dir / "a.dat").find("0.30000000000000004"), std::string::npos);
    std::filesystem::remove_all(dir);
}
