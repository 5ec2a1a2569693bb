#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "mttsort/io.hpp"
#include "mttsort/synth.hpp"

using namespace mttsort;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mttsort_test_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<FrameResult> random_results(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> n_frames(0, 6), n_rec(0, 4), cents(1, 100000), conf(0, 10000);
    std::vector<FrameResult> out;
    int frame = 0;
    const int frames = n_frames(rng);
    for (int i = 0; i < frames; ++i) {
        frame += 1 + n_rec(rng);
        FrameResult fr{frame, {}};
        const int k = 1 + n_rec(rng);
        for (int id = 1; id <= k; ++id) {
            fr.records.push_back({id * 3, BoundingBox((cents(rng) - 50000) / 100.0, cents(rng) / 100.0, cents(rng) / 100.0,
                                                      cents(rng) / 100.0),
                                  conf(rng) / 10000.0});
        }
        out.push_back(fr);
    }
    return out;
}

}  // namespace

TEST(ParseDetections, ExampleRow) {
    const auto d = io::parse_detections("1,-1,10,20,30,40,0.9,1,0\n", 2);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].frame, 1);
    EXPECT_EQ(d[0].box, BoundingBox(10, 20, 30, 40));
    EXPECT_EQ(d[0].confidence, 0.9);
    EXPECT_EQ(d[0].embedding, Eigen::Vector2d(1, 0));
}

TEST(ParseDetections, ShortRowNamesLine) {
    try {
        io::parse_detections("1,-1,10,20,30,40,0.9,1,0\n2,-1,10,20,30,40\n", 2);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(ParseDetections, NormalizesEmbedding) {
    const auto d = io::parse_detections("1,-1,10,20,30,40,0.9,3,4\n", 2);
    EXPECT_DOUBLE_EQ(d[0].embedding[0], 0.6);
    EXPECT_DOUBLE_EQ(d[0].embedding[1], 0.8);
}

TEST(ParseDetections, DimensionMismatchIsSchemaError) {
    EXPECT_THROW(io::parse_detections("1,-1,10,20,30,40,0.9,1,0,0\n", 2), SchemaError);
}

TEST(ParseDetections, RejectsBadValues) {
    EXPECT_THROW(io::parse_detections("1,-1,10,20,0,40,0.9,1,0\n", 2), ParseError);
    EXPECT_THROW(io::parse_detections("1,-1,10,20,30,40,1.9,1,0\n", 2), ParseError);
    EXPECT_THROW(io::parse_detections("1,-1,10,20,30,40,0.9,0,0\n", 2), ParseError);
    EXPECT_THROW(io::parse_detections("x,-1,10,20,30,40,0.9,1,0\n", 2), ParseError);
    EXPECT_THROW(io::parse_detections("0,-1,10,20,30,40,0.9,1,0\n", 2), ParseError);
}

TEST(ParseDetections, SortsByFrameStably) {
    const auto d = io::parse_detections("3,-1,1,1,1,1,0.5,1\n1,-1,2,2,2,2,0.5,1\n1,-1,3,3,3,3,0.5,1\n", 1);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[0].box.left(), 2);
    EXPECT_EQ(d[1].box.left(), 3);
    EXPECT_EQ(d[2].frame, 3);
}

TEST(Results, EmptyResultsGiveEmptyFile) {
    EXPECT_EQ(io::format_results(std::vector<FrameResult>{}), "");
    const std::vector<FrameResult> only_empty{{1, {}}, {2, {}}};
    EXPECT_EQ(io::format_results(only_empty), "");
    EXPECT_TRUE(io::parse_results("").empty());
}

TEST(Results, Golden) {
    const std::vector<FrameResult> r{
        {1, {{2, BoundingBox(10, 20.5, 30.25, 40), 0.5}, {7, BoundingBox(1.005, 2, 3, 4), 1.0}}},
        {3, {{2, BoundingBox(11, 21, 30, 40), 0.123456}}},
    };
    EXPECT_EQ(io::format_results(r),
              "1,2,10.00,20.50,30.25,40.00,0.5000,-1,-1,-1\n"
              "1,7,1.00,2.00,3.00,4.00,1.0000,-1,-1,-1\n"
              "3,2,11.00,21.00,30.00,40.00,0.1235,-1,-1,-1\n");
}

TEST(Results, RoundTrip) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const auto r = random_results(rng);
        const auto text = io::format_results(r);
        const auto back = io::parse_results(text);
        ASSERT_EQ(back.size(), r.size());
        for (std::size_t i = 0; i < r.size(); ++i) {
            EXPECT_EQ(back[i].frame, r[i].frame);
            ASSERT_EQ(back[i].records.size(), r[i].records.size());
            for (std::size_t k = 0; k < r[i].records.size(); ++k) {
                EXPECT_EQ(back[i].records[k].track_id, r[i].records[k].track_id);
                EXPECT_EQ(back[i].records[k].box, r[i].records[k].box);
                EXPECT_EQ(back[i].records[k].confidence, r[i].records[k].confidence);
            }
        }
        EXPECT_EQ(io::format_results(back), text);
    }
}

TEST(Results, WriteFileAndUnsortedInput) {
    const auto dir = temp_dir("results");
    const std::vector<FrameResult> r{{2, {{1, BoundingBox(1, 2, 3, 4), 0.5}}}};
    io::write_results(r, dir / "out.txt");
    EXPECT_EQ(io::read_file(dir / "out.txt"), "2,1,1.00,2.00,3.00,4.00,0.5000,-1,-1,-1\n");
    EXPECT_THROW(io::parse_results("2,1,1,2,3,4,0.5\n1,1,1,2,3,4,0.5\n"), ParseError);
    EXPECT_THROW(io::read_file(dir / "missing.txt"), IoError);
}

TEST(Meta, ParseAndFormat) {
    const auto s = io::parse_meta("name = seq\nframe_count = 300\nwidth = 1280\nheight = 720\nembedding_dim = 32\n");
    EXPECT_EQ(s.name, "seq");
    EXPECT_EQ(s.frame_count, 300);
    EXPECT_EQ(s.width, 1280);
    EXPECT_EQ(s.height, 720);
    EXPECT_EQ(s.embedding_dim, 32);
    EXPECT_EQ(io::parse_meta(io::format_meta(s)).frame_count, 300);
    EXPECT_THROW(io::parse_meta("name = x\n"), SchemaError);
    EXPECT_THROW(io::parse_meta("name = x\nframe_count = a\nwidth=1\nheight=1\nembedding_dim=1\n"), SchemaError);
}

TEST(Sequence, SaveLoadRoundTrip) {
    const auto dir = temp_dir("seq");
    const auto seq = make_sequence(scenario_preset("lookalike"));
    io::save_sequence(seq, dir);
    const auto back = io::load_sequence(dir);
    EXPECT_EQ(back.name, seq.name);
    EXPECT_EQ(back.frame_count, seq.frame_count);
    EXPECT_EQ(back.gt, seq.gt);
    ASSERT_EQ(back.detections.size(), seq.detections.size());
    for (std::size_t i = 0; i < seq.detections.size(); ++i) {
        EXPECT_EQ(back.detections[i].frame, seq.detections[i].frame);
        EXPECT_EQ(back.detections[i].box, seq.detections[i].box);
        EXPECT_EQ(back.detections[i].confidence, seq.detections[i].confidence);
        EXPECT_LT((back.detections[i].embedding - seq.detections[i].embedding).norm(), 1e-5);
    }
    io::save_sequence(back, dir / "again");
    EXPECT_EQ(io::read_file(dir / "det.txt"), io::read_file(dir / "again" / "det.txt"));
}

TEST(Sequence, FrameBeyondCountIsSchemaError) {
    const auto dir = temp_dir("bad_frame");
    io::write_file(dir / "meta.txt", "name = x\nframe_count = 2\nwidth = 10\nheight = 10\nembedding_dim = 1\n");
    io::write_file(dir / "det.txt", "3,-1,1,1,1,1,0.5,1\n");
    EXPECT_THROW(io::load_sequence(dir), SchemaError);
}

TEST(Report, Format) {
    EvalReport r;
    r.hota = r.mota = r.idf1 = 1.0;
    r.det_a = r.ass_a = r.det_re = r.det_pr = 1.0;
    r.fn_count = 6;
    EXPECT_EQ(io::format_report(r),
              "HOTA = 1.00000\nDetA = 1.00000\nAssA = 1.00000\nDetRe = 1.00000\nDetPr = 1.00000\n"
              "MOTA = 1.00000\nIDF1 = 1.00000\nFN = 6\nFP = 0\nIDSW = 0\nFrag = 0\nScore = 3.00000\n");
}

TEST(Overlay, Format) {
    const std::vector<FrameResult> r{{1, {{2, BoundingBox(1, 2, 3, 4), 0.5}, {5, BoundingBox(5, 6, 7, 8), 0.5}}},
                                     {2, {}}};
    EXPECT_EQ(io::format_overlay(r), "1: 2@1.00,2.00,3.00,4.00; 5@5.00,6.00,7.00,8.00\n2:\n");
}

TEST(GaConfig, ParsesConfig7Values) {
    const auto s = io::parse_ga_config(
        "population_size = 10\nmax_generations = 50\nmutation_rate = 0.1\ncrossover_rate = 0.7\nseed = 3\n");
    EXPECT_EQ(s.ga.population_size, 10);
    EXPECT_EQ(s.ga.max_generations, 50);
    EXPECT_EQ(s.ga.mutation_rate, 0.1);
    EXPECT_EQ(s.ga.crossover_rate, 0.7);
    EXPECT_EQ(s.ga.seed, 3u);
    EXPECT_EQ(s.genes.size(), default_gene_specs().size());
}

TEST(GaConfig, GeneLinesAndErrors) {
    const auto s = io::parse_ga_config("gene.max_dist = 0.1, 0.9\ngene.max_age = 5, 50\n");
    ASSERT_EQ(s.genes.size(), 2u);
    EXPECT_EQ(s.genes[1].kind, FieldKind::Integer);
    EXPECT_EQ(s.genes[1].high, 50);
    EXPECT_THROW(io::parse_ga_config("gene.max_dist = 0.9\n"), ConfigError);
    EXPECT_THROW(io::parse_ga_config("mutation_rate = 3\n"), ConfigError);
    EXPECT_THROW(io::parse_ga_config("colour = red\n"), ConfigError);
}

TEST(History, Format) {
    const std::vector<GenerationStats> h{{1, 2.5, 2.0, 0.25}};
    EXPECT_EQ(io::format_history(h), "generation,best,mean,std\n1,2.500000,2.000000,0.250000\n");
}
