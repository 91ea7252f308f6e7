#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dyadica/config.hpp"
#include "dyadica/report.hpp"

using namespace dyadica;

TEST(Config, DefaultsValidate) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.root(), RootBox(1, 2, -6));
  EXPECT_EQ(parse_config_string("").hash(), c.hash());
}

TEST(Config, ParsesSectionsTuplesAndKernels) {
  const auto c = parse_config_string(
      "[root]\ndim = 2\ntop = 1\nfinest = -4\n"
      "[exponents]\ntuples = 3,3,3 ; 2, inf, inf\n"
      "[smoothness]\nkappa = 0,1\nn = 1,0,0 | 0,1,1\neps = 0.05\n"
      "[sweep]\nfinest = -4,-5\n"
      "[ensemble]\nseed = 18446744073709551615\ngenerators = atoms,lacunary\n"
      "[kernel.h]\nkind = cz_odd\nscale = 0.5\neps_trunc = 0.01\n"
      "[kernel.z]\nkind = zero\narity = 2\n");
  EXPECT_EQ(c.dim, 2);
  ASSERT_EQ(c.exponents.size(), 2u);
  EXPECT_EQ(c.exponents[0], (std::vector<double>{3, 3, 3}));
  EXPECT_TRUE(std::isinf(c.exponents[1][2]));
  EXPECT_EQ(c.splits.size(), 2u);
  EXPECT_EQ(c.splits[1], (std::vector<int>{0, 1, 1}));
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  ASSERT_EQ(c.kernels.size(), 2u);
  EXPECT_EQ(c.kernels[0].name, "h");
  EXPECT_DOUBLE_EQ(c.kernels[0].scale, 0.5);
  EXPECT_EQ(c.kernels[1].arity, 2);
}

TEST(Config, CanonicalTextRoundTrips) {
  const auto c = parse_config_string(
      "[root]\nfinest = -5\n[smoothness]\nn = 1,1\n[sparse]\nmode = mainiter\ntheta = 8\n"
      "[inputs]\nfiles = a.bin,b.bin\n[kernel.t]\nkind = tabulated\ntable = t.txt\n",
      false);
  const auto back = parse_config_string(c.canonical(), false);
  EXPECT_EQ(back.canonical(), c.canonical());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(back.inputs, (std::vector<std::string>{"a.bin", "b.bin"}));
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = parse_config_string("[ensemble]\nseed = 5\n");
  const auto b = parse_config_string("[ensemble]\nseed = 5\n");
  const auto c = parse_config_string("[ensemble]\nseed = 6\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), c.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  // the output directory does not change results, so it does not change the hash
  EXPECT_EQ(parse_config_string("[output]\ndir = x\n").hash(), ExperimentConfig{}.hash());
}

TEST(Config, ValidationErrors) {
  const char* bad[] = {
      "[root]\ncolour = red\n",                     // unknown key
      "[nosuch]\nx = 1\n",                          // unknown section
      "[root]\ndim = two\n",                        // not an integer
      "[root]\ndim = 4\n",                          // dimension cap
      "[root]\ntop = -6\n",                         // finest >= top
      "[root]\ndim = 3\ntop = 2\nfinest = -7\n",    // grid too large
      "[wavelet]\norder = 2\nsmoothness = 2\n",     // k + 1 > N
      "[wavelet]\ndilation = 6\n",                  // even dilation
      "[exponents]\ntuples = 2,2 | 3\n",            // mixed arity
      "[exponents]\ntuples = 1,2\n",                // p <= 1
      "[smoothness]\nkappa = 3\n",                  // |kappa| > k
      "[smoothness]\nn = 2,1\n",                    // split sum > k
      "[smoothness]\nn = 1.5,0\n",                  // non-integer split
      "[ensemble]\nseed = -1\n",                    // negative seed
      "[ensemble]\ngenerators = atoms,noise\n",     // unknown generator
      "[sparse]\nmode = greedy\n",                  // unknown mode
      "[sparse]\ntheta = 1\n",                      // theta <= 1
      "[testbench]\np = 4\nq = 2\n",                // p >= q
      "[kernel.x]\nkind = magic\n",                 // unknown kernel kind
      "[kernel.x]\nkind = tabulated\n",             // table missing
      "[kernel.x]\nkind = planted_paraproduct\n",   // symbol missing
      "[root\ndim = 1\n",                           // syntax
  };
  for (const char* text : bad) EXPECT_THROW(parse_config_string(text), ConfigError) << text;
  EXPECT_THROW(load_config("/nonexistent/dyadica.ini"), ConfigError);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "dyadica_config_test.ini";
  {
    std::ofstream out(path);
    out << "; comment\n[ensemble]\ncount = 7\n";
  }
  EXPECT_EQ(load_config(path.string()).count, 7);
  std::filesystem::remove(path);
}

TEST(Csv, EscapingAndParsingRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "dyadica_csv_test.csv";
  const std::vector<std::string> header{"cube", "note", "value"};
  const std::vector<std::string> row{"2:-1:3,1", "say \"hi\"\nthere", format_number(0.1)};
  {
    CsvWriter w(path, header);
    w.row(row);
    EXPECT_THROW(w.row({"short"}), std::logic_error);
  }
  std::ifstream in(path, std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::filesystem::remove(path);
  EXPECT_NE(text.find("\r\n"), std::string::npos);
  const auto rows = parse_csv(text);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], header);
  EXPECT_EQ(rows[1], row);
  EXPECT_EQ(std::stod(rows[1][2]), 0.1);
  EXPECT_THROW(parse_csv("\"open"), std::runtime_error);
  EXPECT_EQ(parse_csv("a,,b\n")[0], (std::vector<std::string>{"a", "", "b"}));
}

TEST(Report, NumbersRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) EXPECT_EQ(std::stod(format_number(v)), v);
  EXPECT_EQ(format_number(kInf), "inf");
  EXPECT_EQ(format_number(-kInf), "-inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(2.0), "2");
}

TEST(Report, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}
