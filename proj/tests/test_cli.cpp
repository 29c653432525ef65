#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pseudoscope/cli.hpp"
#include "pseudoscope/config.hpp"
#include "pseudoscope/errors.hpp"
#include "pseudoscope/io.hpp"

using namespace pseudoscope;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("pseudoscope-test-" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

fs::path write_text(const fs::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "pseudoscope");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) {
        *out_text = out.str();
    }
    if (err_text) {
        *err_text = err.str();
    }
    return code;
}

std::size_t count_of(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

// Minimal XML well-formedness check: balanced element tags, quoted
// attributes, and no bare '&' or '<' in text.
bool well_formed_xml(const std::string& xml) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool root_seen = false;
    while (i < xml.size()) {
        if (xml[i] != '<') {
            if (xml[i] == '&') {
                const auto semi = xml.find(';', i);
                if (semi == std::string::npos || semi - i > 6) {
                    return false;
                }
            }
            ++i;
            continue;
        }
        const auto close = xml.find('>', i);
        if (close == std::string::npos) {
            return false;
        }
        std::string tag = xml.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.starts_with("?")) {
            continue;
        }
        if (std::count(tag.begin(), tag.end(), '"') % 2 != 0 || tag.find('<') != std::string::npos) {
            return false;
        }
        if (tag.starts_with("/")) {
            if (stack.empty() || stack.back() != tag.substr(1)) {
                return false;
            }
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.ends_with("/");
        const std::string name = tag.substr(0, tag.find_first_of(" /"));
        if (stack.empty() && root_seen) {
            return false;
        }
        root_seen = true;
        if (!self_closing) {
            stack.push_back(name);
        }
    }
    return root_seen && stack.empty();
}

ConcentrationReport small_report(Structure s, std::size_t d, std::size_t trials, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.structure = std::move(s);
    cfg.d = d;
    cfg.trials = trials;
    cfg.seed = seed;
    return run_experiment(cfg);
}

}  // namespace

TEST(ConfigParse, SectionKeysAndComments) {
    const auto cfg = ConfigFile::parse("# header\n\n[experiment]\r\n structure = toeplitz(3,2,1) \n; note\nd=50\n",
                                       "x.ini");
    EXPECT_EQ(cfg.section(), "experiment");
    EXPECT_EQ(cfg.section_line(), 3u);
    EXPECT_EQ(cfg.require("structure").value, "toeplitz(3,2,1)");
    EXPECT_EQ(cfg.require("structure").line, 4u);
    EXPECT_EQ(cfg.get_size("d", 0), 50u);
    EXPECT_EQ(cfg.get_double("eps", 2.5), 2.5);
    EXPECT_EQ(cfg.get_structure("structure"), Structure::toeplitz({3.0, 2.0, 1.0}));
}

TEST(ConfigParse, ErrorsCarryLineNumbers) {
    const auto expect_line = [](const std::string& text, std::size_t line) {
        try {
            ConfigFile::parse(text, "c.ini");
            ADD_FAILURE() << "no error for: " << text;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.line(), line) << e.what();
            EXPECT_EQ(std::string(e.what()).rfind("c.ini:" + std::to_string(line) + ": ", 0), 0u) << e.what();
        }
    };
    expect_line("d = 1\n[experiment]\n", 1);
    expect_line("[experiment]\nd 1\n", 2);
    expect_line("[experiment]\nd = 1\nd = 2\n", 3);
    expect_line("[a]\n[b]\n", 2);
    expect_line("[experiment\n", 1);
    expect_line("\n\n", 2);
    expect_line("[experiment]\nbad key = 1\n", 2);

    const auto cfg = ConfigFile::parse("[experiment]\nd = ten\nstructure = circulant\n", "c.ini");
    try {
        cfg.get_size("d", 0);
        ADD_FAILURE();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    try {
        cfg.get_structure("structure");
        ADD_FAILURE();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(cfg.require_section("scaling"), ConfigError);
    EXPECT_THROW(cfg.require_known({"d"}), ConfigError);
}

TEST(ConfigParse, ExperimentSectionResolves) {
    const auto file = ConfigFile::parse("[experiment]\nstructure = jordan\nd = 64\nseed = 9\nregion = 0.2\n");
    const auto cfg = cli::experiment_config(file, std::nullopt);
    EXPECT_EQ(cfg.d, 64u);
    EXPECT_EQ(cfg.trials, 1000u);
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(*cfg.delta, 0.2);
    EXPECT_EQ(cli::experiment_config(file, 77).seed, 77u);

    const auto bad_solver = ConfigFile::parse("[experiment]\nstructure = diagonal(2,3)\nsolver = jordan-poly\n");
    EXPECT_THROW(cli::experiment_config(bad_solver, std::nullopt), ConfigError);
    const auto zero_trials = ConfigFile::parse("[experiment]\nstructure = jordan\ntrials = 0\n");
    EXPECT_THROW(cli::experiment_config(zero_trials, std::nullopt), ConfigError);
    const auto missing = ConfigFile::parse("[experiment]\nd = 5\n");
    EXPECT_THROW(cli::experiment_config(missing, std::nullopt), ConfigError);
}

TEST(ConfigParse, TailSettingsDefaults) {
    const auto corner = cli::tail_settings(ConfigFile::parse("[tails]\nwhich = corner\nd = 50\nc = 2\n"), 5);
    EXPECT_DOUBLE_EQ(corner.delta, 0.04);
    EXPECT_EQ(corner.seed, 5u);
    const auto hw = cli::tail_settings(ConfigFile::parse("[tails]\nwhich = hw\nd = 10\n"), std::nullopt);
    EXPECT_EQ(hw.k, 9u);
    const auto qf = cli::tail_settings(ConfigFile::parse("[tails]\nwhich = qf-diag\nentries = 1, 2i, -0.5\n"),
                                       std::nullopt);
    EXPECT_EQ(qf.d, 3u);
    EXPECT_EQ(qf.entries[1], Complex(0.0, 2.0));
    EXPECT_THROW(cli::tail_settings(ConfigFile::parse("[tails]\nwhich = norm\nk = 3\n"), std::nullopt),
                 ConfigError);
    EXPECT_THROW(cli::tail_settings(ConfigFile::parse("[tails]\nwhich = cw\nd = 4\nk = 4\n"), std::nullopt),
                 ConfigError);
}

TEST(CsvIo, FieldQuoting) {
    EXPECT_EQ(io::csv_field("plain"), "plain");
    EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
    EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    const auto fields = io::parse_csv_record("1,\"a,b\",\"x\"\"y\",");
    ASSERT_EQ(fields.size(), 4u);
    EXPECT_EQ(fields[1], "a,b");
    EXPECT_EQ(fields[2], "x\"y");
    EXPECT_EQ(fields[3], "");
    EXPECT_THROW(io::parse_csv_record("\"open"), InvalidArgument);
}

TEST(CsvIo, EigenvaluesRoundTripExactly) {
    const auto report = small_report(Structure::toeplitz({3.0, 2.0, 1.0}), 30, 12, 21);
    std::stringstream buffer;
    io::write_eigenvalues_csv(buffer, report);
    const auto rows = io::read_eigenvalues_csv(buffer);
    std::size_t n = 0;
    for (const auto& rec : report.records) {
        for (std::size_t k = 0; k < rec.spectrum.eigenvalues.size(); ++k, ++n) {
            ASSERT_LT(n, rows.size());
            EXPECT_EQ(rows[n].trial, rec.index);
            EXPECT_EQ(rows[n].index, k);
            EXPECT_EQ(rows[n].value, rec.spectrum.eigenvalues[k]);
        }
    }
    EXPECT_EQ(rows.size(), n);
    std::stringstream bad("trial,index,re\n");
    EXPECT_THROW(io::read_eigenvalues_csv(bad), InvalidArgument);
}

TEST(SvgIo, ScatterHasOneCirclePerEigenvalue) {
    for (const auto& s : {Structure::jordan(), Structure::diagonal({2.0, 3.0}), Structure::toeplitz({3.0, 2.0, 1.0}),
                          Structure::jordan_corner(Complex(2.0, 3.0))}) {
        const auto report = small_report(s, 20, 15, 3);
        const std::string svg = io::scatter_svg(report);
        EXPECT_TRUE(well_formed_xml(svg)) << to_string(s);
        EXPECT_EQ(count_of(svg, "<circle"), 15u * 20u) << to_string(s);
        EXPECT_GE(count_of(svg, "<path"), 1u) << to_string(s);
    }
    EXPECT_FALSE(well_formed_xml("<svg><g></svg>"));
    EXPECT_FALSE(well_formed_xml("<svg>a & b</svg>"));
}

TEST(Manifest, VerifiesAndDetectsTampering) {
    TempDir dir;
    io::write_file(dir.path(), "a.csv", "x,y\r\n1,2\r\n");
    io::write_file(dir.path(), "b.json", "{}\n");
    io::write_manifest(dir.path(), "experiment", "cfg.ini", "{\"d\":1}", {"a.csv", "b.json"});
    EXPECT_TRUE(io::verify_manifest(dir.path()).empty());
    io::write_file(dir.path(), "a.csv", "x,y\r\n1,3\r\n");
    EXPECT_EQ(io::verify_manifest(dir.path()), std::vector<std::string>{"a.csv"});
    fs::remove(dir.path() / "b.json");
    EXPECT_EQ(io::verify_manifest(dir.path()).size(), 2u);
}

TEST(Manifest, Sha256KnownDigest) {
    // FIPS 180-2 test vector.
    EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CommandLine, ExperimentWritesVerifiedArtifacts) {
    TempDir dir;
    const auto cfg = write_text(dir.path(), "e.ini", "[experiment]\nstructure = jordan\nd = 16\ntrials = 10\n");
    std::string out;
    ASSERT_EQ(run_cli({"experiment", "--config", cfg.string(), "--out", (dir.path() / "o").string()}, &out), 0);
    for (const char* f : {"eigenvalues.csv", "trials.csv", "report.json", "scatter.svg", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(dir.path() / "o" / f)) << f;
    }
    EXPECT_TRUE(io::verify_manifest(dir.path() / "o").empty());
    EXPECT_NE(read_text(dir.path() / "o" / "report.json").find("\"schema\": \"pseudoscope.report/1\""),
              std::string::npos);
    EXPECT_NE(out.find("containment_fraction="), std::string::npos);
}

TEST(CommandLine, CsvBytesIgnoreThreadCount) {
    TempDir dir;
    const auto cfg = write_text(dir.path(), "e.ini", "[experiment]\nstructure = toeplitz(3,2)\nd = 24\ntrials = 30\n");
    ASSERT_EQ(run_cli({"experiment", "--config", cfg.string(), "--out", (dir.path() / "a").string(), "--threads",
                       "1", "--seed", "5"}),
              0);
    ASSERT_EQ(run_cli({"experiment", "--config", cfg.string(), "--out", (dir.path() / "b").string(), "--threads",
                       "3", "--seed", "5"}),
              0);
    for (const char* f : {"eigenvalues.csv", "trials.csv"}) {
        EXPECT_EQ(read_text(dir.path() / "a" / f), read_text(dir.path() / "b" / f)) << f;
    }
}

TEST(CommandLine, ExitCodes) {
    TempDir dir;
    const auto out = (dir.path() / "o").string();
    std::string err;
    const auto bad = write_text(dir.path(), "bad.ini", "[experiment]\nstructure = jordan\nd = x\n");
    EXPECT_EQ(run_cli({"experiment", "--config", bad.string(), "--out", out}, nullptr, &err), cli::kExitUsage);
    EXPECT_NE(err.find("bad.ini:3:"), std::string::npos) << err;

    const auto one_dim = write_text(dir.path(), "s.ini", "[scaling]\nstructure = jordan\ndims = 64\n");
    EXPECT_EQ(run_cli({"scaling", "--config", one_dim.string(), "--out", out}), cli::kExitUsage);
    const auto no_dims = write_text(dir.path(), "s0.ini", "[scaling]\nstructure = jordan\ndims =\n");
    EXPECT_EQ(run_cli({"scaling", "--config", no_dims.string(), "--out", out}), cli::kExitUsage);
    const auto wrong_section = write_text(dir.path(), "w.ini", "[tails]\nwhich = norm\n");
    EXPECT_EQ(run_cli({"scaling", "--config", wrong_section.string(), "--out", out}), cli::kExitUsage);
    const auto unknown_which = write_text(dir.path(), "u.ini", "[tails]\nwhich = sideways\n");
    EXPECT_EQ(run_cli({"tails", "--config", unknown_which.string(), "--out", out}), cli::kExitUsage);
    EXPECT_EQ(run_cli({"experiment", "--config", (dir.path() / "missing.ini").string()}), cli::kExitUsage);
    EXPECT_EQ(run_cli({"experiment"}), cli::kExitUsage);
    EXPECT_EQ(run_cli({}), cli::kExitUsage);
    EXPECT_EQ(run_cli({"--help"}), cli::kExitOk);

    EXPECT_EQ(run_cli({"oracle-check", "--d-max", "1"}), cli::kExitOk);
    EXPECT_EQ(run_cli({"oracle-check", "--d-max", "101"}), cli::kExitUsage);
    EXPECT_EQ(run_cli({"oracle-check", "--d-max", "12", "--corrupt-fast-path"}), cli::kExitCheckFailed);
}

TEST(CommandLine, TailsWritesVerdict) {
    TempDir dir;
    const auto cfg = write_text(dir.path(), "t.ini", "[tails]\nwhich = corner\nd = 1\ndelta = 0.5\nsamples = 4000\n");
    std::string out;
    ASSERT_EQ(run_cli({"tails", "--config", cfg.string(), "--out", dir.path().string()}, &out), cli::kExitOk);
    const std::string csv = read_text(dir.path() / "tails.csv");
    EXPECT_EQ(csv.rfind("which,series,t,empirical", 0), 0u);
    EXPECT_NE(csv.find("corner,annulus,0.5,"), std::string::npos);
    EXPECT_TRUE(io::verify_manifest(dir.path()).empty());
    EXPECT_NE(out.find("verdict=pass"), std::string::npos);
}

TEST(CommandLine, ScalingWritesFit) {
    TempDir dir;
    const auto cfg = write_text(dir.path(), "s.ini",
                                "[scaling]\nstructure = scalar(0)\ndims = 16, 32, 64\ntrials = 40\nseed = 2\n");
    ASSERT_EQ(run_cli({"scaling", "--config", cfg.string(), "--out", dir.path().string()}), cli::kExitOk);
    const std::string csv = read_text(dir.path() / "scaling.csv");
    EXPECT_EQ(csv.rfind("d,median_deviation,q90_deviation\r\n16,", 0), 0u);
    EXPECT_TRUE(well_formed_xml(read_text(dir.path() / "scaling.svg")));
    EXPECT_NE(read_text(dir.path() / "scaling.json").find("\"slope\""), std::string::npos);
}
