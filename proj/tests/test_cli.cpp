// End-to-end runs of the command-line tool on small fixtures.

#include "doctest.h"

#include "cbsim/engine.hpp"
#include "test_util.hpp"

#include <cstdlib>
#include <sstream>

namespace fs = std::filesystem;
using testutil::slurp;
using testutil::TempDir;

namespace {

struct RunResult {
    int status;
    std::string err;
};

RunResult run(const TempDir& dir, const std::string& args)
{
    const auto err = dir / "stderr.txt";
    const std::string cmd = "cd '" + dir.path().string() + "' && '" CBSIM_CLI "' " + args + " > /dev/null 2> '" +
                            err.string() + "'";
    const int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(err)};
}

std::string dated_rows(const std::string& header, const std::vector<double>& values)
{
    std::ostringstream os;
    os << header << '\n';
    for (std::size_t k = 0; k < values.size(); ++k)
        os << cbsim::format_iso_date(cbsim::add_days(cbsim::iso_date("2020-02-01"), static_cast<long>(k))) << ','
           << values[k] << '\n';
    return os.str();
}

const char* kParams = "alpha_p = 0.3\nalpha_e = 0.3\nalpha_b = 0.3\nbeta_p = 0.1\nbeta_e = 0.1\ndelta_b = 0.05\n"
                      "kappa_e = 0.3\nkappa_b = 0.2\nsigma = 0.02\ninit_p = 0.01\ninit_e = 0.01\ninit_b = 0.01\n";

// 20 days of data, 80 agents, ring lattice.
void write_fixture(const TempDir& dir, const std::string& extra = {})
{
    std::vector<double> cases, search;
    for (int k = 0; k < 20; ++k) {
        cases.push_back(std::round(30 * std::exp(-std::pow((k - 7) / 4.0, 2))));
        search.push_back(k < 10 ? k : 19 - k);
    }
    dir.write("cases.csv", dated_rows("date,cases", cases));
    dir.write("search.csv", dated_rows("date,search", search));
    dir.write("params.txt", kParams);
    dir.write("run.cfg", "cases.path = cases.csv\nsearch.path = search.csv\n"
                         "window.start = 2020-02-01\nwindow.end = 2020-02-20\n"
                         "network.kind = watts_strogatz\nnetwork.k = 4\nnetwork.agents = 80\n"
                         "abc.method = rejection\nabc.draws = 12\nabc.quantile = 1\n"
                         "predictive_draws = 6\nseed = 17\n" +
                             extra);
}

}  // namespace

TEST_CASE("synth-cases writes the demo series")
{
    TempDir dir("cli");
    REQUIRE(run(dir, "synth-cases --file cases.csv").status == 0);
    const auto text = slurp(dir / "cases.csv");
    CHECK(std::count(text.begin(), text.end(), '\n') == 151);
    CHECK(text.rfind("date,cases\n2020-01-31,", 0) == 0);
}

TEST_CASE("simulate with identity parameters gives constant series")
{
    TempDir dir("cli");
    write_fixture(dir);
    dir.write("zero.txt", "alpha_p = 0\nalpha_e = 0\nalpha_b = 0\nbeta_p = 0\nbeta_e = 0\ndelta_b = 0\n"
                          "kappa_e = 0\nkappa_b = 0\nsigma = 0\ninit_p = 0.2\ninit_e = 0.3\ninit_b = 0.4\n");
    const auto r = run(dir, "--config run.cfg --out out simulate --params zero.txt");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    std::istringstream traj(slurp(dir / "out" / "trajectory.csv"));
    std::string line;
    std::getline(traj, line);
    int rows = 0;
    while (std::getline(traj, line)) {
        CHECK(line.substr(10) == ",0.2,0.3,0.4");
        ++rows;
    }
    CHECK(rows == 20);
    const auto b = cbsim::read_series_csv(dir / "out" / "behaviour.csv");
    CHECK(b.size() == 20);
    for (double v : b.values()) CHECK(v == 0.0);
    CHECK(fs::exists(dir / "out" / "simulate.json"));
}

TEST_CASE("simulate is byte-identical across reruns and thread counts")
{
    TempDir dir("cli");
    write_fixture(dir);
    REQUIRE(run(dir, "--config run.cfg --out a simulate --params params.txt --replicates 5").status == 0);
    REQUIRE(run(dir, "--config run.cfg --out b --threads 3 simulate --params params.txt --replicates 5").status == 0);
    for (const char* f : {"trajectory.csv", "emotion.csv", "bands/behaviour.csv", "bands/perception.csv",
                          "bands/mean_behaviour.csv", "simulate.json"})
        CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
    REQUIRE(run(dir, "--config run.cfg --out c --seed 18 simulate --params params.txt").status == 0);
    CHECK(slurp(dir / "a" / "trajectory.csv") != slurp(dir / "c" / "trajectory.csv"));
}

TEST_CASE("calibrate: quantile 1 keeps every draw; threads do not change artifacts")
{
    TempDir dir("cli");
    write_fixture(dir);
    const auto r = run(dir, "--config run.cfg --out one calibrate");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const auto post = slurp(dir / "one" / "posterior.csv");
    CHECK(std::count(post.begin(), post.end(), '\n') == 13);
    REQUIRE(run(dir, "--config run.cfg --out two --threads 2 calibrate").status == 0);
    for (const char* f : {"posterior.csv", "bands/behaviour.csv", "bands/emotion.csv", "bands/perception.csv",
                          "calibration.json", "observed_search.csv"})
        CHECK_MESSAGE(slurp(dir / "one" / f) == slurp(dir / "two" / f), f);

    REQUIRE(run(dir, "--config run.cfg --out one validate").status == 0);
    CHECK(slurp(dir / "one" / "validation.json").find("\"coverage\"") != std::string::npos);
    REQUIRE(run(dir, "--out one report").status == 0);
}

TEST_CASE("calibrate with a synthetic truth writes a recovery summary")
{
    TempDir dir("cli");
    write_fixture(dir, "synthetic_truth = params.txt\n");
    const auto r = run(dir, "--config run.cfg --out syn calibrate");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const auto rec = slurp(dir / "syn" / "recovery.json");
    CHECK(rec.find("\"truth_distance_generating_seed\": 0.0") != std::string::npos);
    CHECK(rec.find("\"prior_relative_error\"") != std::string::npos);
}

TEST_CASE("validate: bands equal to the observation give full coverage")
{
    TempDir dir("cli");
    write_fixture(dir);
    fs::create_directories(dir / "bands");
    cbsim::SummaryBands b;
    b.start = cbsim::iso_date("2020-02-01");
    for (int k = 0; k < 20; ++k) {
        const double v = (k < 10 ? k : 19 - k) / 9.0;
        b.lo.push_back(v);
        b.median.push_back(v);
        b.hi.push_back(v);
    }
    cbsim::write_bands_csv(dir / "bands" / "behaviour.csv", b);
    cbsim::write_bands_csv(dir / "bands" / "perception.csv", b);
    const auto r = run(dir, "--config run.cfg --out v validate --bands bands");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    CHECK(slurp(dir / "v" / "validation.json").find("\"coverage\": 1.0") != std::string::npos);

    // Bands extending past the search data are rejected.
    b.start = cbsim::iso_date("2020-01-25");
    cbsim::write_bands_csv(dir / "bands" / "behaviour.csv", b);
    cbsim::write_bands_csv(dir / "bands" / "perception.csv", b);
    const auto bad = run(dir, "--config run.cfg --out v validate --bands bands");
    CHECK(bad.status != 0);
    CHECK(bad.err.find("2020-01-25") != std::string::npos);
}

TEST_CASE("validate with R_t and survey inputs")
{
    TempDir dir("cli");
    std::vector<double> rt;
    for (int k = 0; k < 20; ++k) rt.push_back(2.0 - 0.07 * k);
    dir.write("rt.csv", dated_rows("date,rt", rt));
    dir.write("survey.csv", "date,pct_worried\n2020-02-03,70\n2020-02-10,60\n2020-02-17,50\n");
    write_fixture(dir, "rt.path = rt.csv\nsurvey.path = survey.csv\nrt_split_date = 2020-02-10\n");
    REQUIRE(run(dir, "--config run.cfg --out o calibrate").status == 0);
    const auto r = run(dir, "--config run.cfg --out o validate");
    REQUIRE_MESSAGE(r.status == 0, r.err);
    const auto v = slurp(dir / "o" / "validation.json");
    CHECK(v.find("\"survey_n\": 3") != std::string::npos);
    CHECK(v.find("\"before_split\"") != std::string::npos);
    CHECK(v.find("\"last\": \"2020-02-09\"") != std::string::npos);
    CHECK(v.find("\"from_split\"") != std::string::npos);
    CHECK(v.find("\"pearson_r\": null") == std::string::npos);

    const auto rep = run(dir, "--out o report");
    CHECK(rep.status == 0);
}

TEST_CASE("errors: missing inputs, bad priors, missing seed")
{
    TempDir dir("cli");
    write_fixture(dir);
    dir.write("missing.cfg", "cases.path = nope.csv\nseed = 1\n");
    auto r = run(dir, "--config missing.cfg --out x simulate --params params.txt");
    CHECK(r.status == 1);
    CHECK(r.err.find("nope.csv") != std::string::npos);

    dir.write("prior.cfg", "cases.path = cases.csv\nprior.alpha_p = 0.5 0.1\nseed = 1\n");
    r = run(dir, "--config prior.cfg calibrate");
    CHECK(r.status == 1);
    CHECK(r.err.find("alpha_p") != std::string::npos);

    dir.write("noseed.cfg", "cases.path = cases.csv\nsearch.path = search.csv\n");
    r = run(dir, "--config noseed.cfg --out x simulate --params params.txt");
    CHECK(r.status == 1);
    CHECK(r.err.find("seed") != std::string::npos);

    r = run(dir, "--config run.cfg --out x simulate --params absent.txt");
    CHECK(r.status == 1);
    CHECK(r.err.find("absent.txt") != std::string::npos);

    CHECK(run(dir, "--config run.cfg").status != 0);  // no subcommand
}
