#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "edoks/errors.hpp"
#include "edoks/manifest.hpp"
#include "support/synthetic.hpp"

using namespace edoks;
namespace fs = std::filesystem;
namespace synth = edoks::testing;

namespace {

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name, std::ios::binary) << text;
  return dir / name;
}

}  // namespace

TEST(Csv, QuotedFieldsAndComments) {
  std::istringstream in(
      "\xEF\xBB\xBF# produced by a tool\n"
      "a,b,c\n"
      "1,\"x, y\",\"say \"\"hi\"\"\"\n"
      "\n"
      "2,\"multi\nline\",3\r\n");
  const CsvTable t = read_csv(in);
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0], (std::vector<std::string>{"1", "x, y", "say \"hi\""}));
  EXPECT_EQ(t.rows[1], (std::vector<std::string>{"2", "multi\nline", "3"}));
  EXPECT_EQ(t.line_numbers[0], 3u);
  EXPECT_EQ(t.line_numbers[1], 5u);
}

TEST(Csv, UnterminatedQuoteThrows) {
  std::istringstream in("a\n\"oops\n");
  EXPECT_THROW(read_csv(in), InvalidInput);
}

TEST(Csv, EscapeAndFormat) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("q\"x"), "\"q\"\"x\"");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e12), "1e+12");
  EXPECT_EQ(std::stod(format_double(M_PI)), M_PI);
}

TEST(PairManifest, ResolvesRelativeAndKeepsBadRows) {
  const fs::path dir = synth::scratch_dir("manifest_pair");
  const fs::path m = write(dir, "m.csv",
                           "ref_path,dist_path\n"
                           "a.png,b.png\n"
                           "/abs/c.png,d.png\n"
                           "only_one\n"
                           ",e.png\n");
  const auto rows = read_pair_manifest(m);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].ref, dir / "a.png");
  EXPECT_EQ(rows[0].dist_text, "b.png");
  EXPECT_TRUE(rows[0].error.empty());
  EXPECT_EQ(rows[1].ref, fs::path("/abs/c.png"));
  EXPECT_FALSE(rows[2].error.empty());
  EXPECT_EQ(rows[2].line, 4u);
  EXPECT_FALSE(rows[3].error.empty());
}

TEST(PairManifest, MissingColumnThrows) {
  const fs::path dir = synth::scratch_dir("manifest_cols");
  EXPECT_THROW(read_pair_manifest(write(dir, "m.csv", "ref,dist\na,b\n")), InvalidInput);
  EXPECT_THROW(read_pair_manifest(dir / "absent.csv"), InvalidInput);
}

TEST(JndManifest, ParsesVotesAndExternalScores) {
  const fs::path dir = synth::scratch_dir("manifest_jnd");
  const fs::path m = write(dir, "j.csv",
                           "ref_path,dist_path,votes_same,judges,lpips\n"
                           "r.png,d.png,2,3,0.25\n"
                           "r.png,e.png,0,3,0.5\n");
  const auto rows = read_jnd_manifest(m);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].votes_same, 2);
  EXPECT_EQ(rows[0].judges, 3);
  ASSERT_EQ(rows[1].external.size(), 1u);
  EXPECT_EQ(rows[1].external[0].name, "lpips");
  EXPECT_EQ(rows[1].external[0].value, 0.5);
}

TEST(JndManifest, BadRowsThrow) {
  const fs::path dir = synth::scratch_dir("manifest_jnd_bad");
  const std::string head = "ref_path,dist_path,votes_same,judges\n";
  EXPECT_THROW(read_jnd_manifest(write(dir, "a.csv", head + "r,d,4,3\n")), InvalidInput);
  EXPECT_THROW(read_jnd_manifest(write(dir, "b.csv", head + "r,d,x,3\n")), InvalidInput);
  EXPECT_THROW(read_jnd_manifest(write(dir, "c.csv", head + "r,d,1\n")), InvalidInput);
  EXPECT_THROW(read_jnd_manifest(write(dir, "d.csv", head + "r,d,1.5,3\n")), InvalidInput);
}

TEST(TwoAfcManifest, ParsesJudgeAndPairedExternalColumns) {
  const fs::path dir = synth::scratch_dir("manifest_2afc");
  const fs::path m = write(dir, "t.csv",
                           "ref_path,p0_path,p1_path,judge,ssim:p0,ssim:p1\n"
                           "r.png,a.png,b.png,0.75,0.9,0.8\n");
  const auto rows = read_2afc_manifest(m);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].judge, 0.75);
  EXPECT_EQ(rows[0].p1, dir / "b.png");
  ASSERT_EQ(rows[0].external.size(), 1u);
  EXPECT_EQ(rows[0].external[0].name, "ssim");
  EXPECT_EQ(rows[0].external[0].p0, 0.9);
  EXPECT_EQ(rows[0].external[0].p1, 0.8);
}

TEST(TwoAfcManifest, BadRowsThrow) {
  const fs::path dir = synth::scratch_dir("manifest_2afc_bad");
  const std::string head = "ref_path,p0_path,p1_path,judge\n";
  EXPECT_THROW(read_2afc_manifest(write(dir, "a.csv", head + "r,a,b,1.5\n")), InvalidInput);
  EXPECT_THROW(read_2afc_manifest(write(dir, "b.csv", head + "r,a,b\n")), InvalidInput);
  EXPECT_THROW(read_2afc_manifest(write(dir, "c.csv", "ref_path,p0_path,p1_path,judge,x:p0\nr,a,b,1,2\n")),
               InvalidInput);
}
