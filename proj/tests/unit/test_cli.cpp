#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "aipw/cli.hpp"
#include "aipw/simgen.hpp"
#include "oracles.hpp"

using namespace aipw;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("aipw_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_csv(const std::string& path, const Matrix& x, const Vector& y, const Vector& delta,
               const std::string& missing = "NA") {
    std::ofstream f(path);
    f.precision(17);
    for (Index j = 0; j < x.cols(); ++j) f << "x" << j + 1 << ',';
    f << "y\n";
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) f << x(i, j) << ',';
        if (delta(i) == 1.0) f << y(i);
        else f << missing;
        f << '\n';
    }
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("CSV parsing") {
    std::istringstream in("a,\"b, quoted\",y\r\n1,2,NA\n3,\"4\",\n5,6,7\n");
    const CsvTable t = parse_csv(in);
    CHECK(t.header == std::vector<std::string>{"a", "b, quoted", "y"});
    CHECK(t.values.rows() == 3);
    CHECK(std::isnan(t.values(0, 2)));
    CHECK(std::isnan(t.values(1, 2)));
    CHECK(t.values(2, 2) == 7.0);
    CHECK(t.values(1, 1) == 4.0);

    const IncompleteDataset d = dataset_from_table(t, "y");
    CHECK(d.delta == (Vector(3) << 0, 0, 1).finished());

    std::istringstream bad("a,y\n1,2\n3,x7\n");
    try {
        (void)parse_csv(bad);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
    }
    std::istringstream ragged("a,y\n1\n");
    CHECK_THROWS_AS((void)parse_csv(ragged), Error);
}

TEST_CASE("simulate is byte-identical across runs and worker counts") {
    TempDir tmp;
    const std::vector<std::string> base{"simulate", "--designs", "C1", "--sizes", "I", "--M", "10",
                                        "--estimators", "CC", "--seed", "7"};
    auto a = base, b = base, c = base;
    a.insert(a.end(), {"--out", tmp.file("a.csv")});
    b.insert(b.end(), {"--out", tmp.file("b.csv")});
    c.insert(c.end(), {"--out", tmp.file("c.csv"), "--workers", "3"});
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    REQUIRE(run(c).code == 0);
    const std::string first = slurp(tmp.file("a.csv"));
    CHECK(!first.empty());
    CHECK(first == slurp(tmp.file("b.csv")));
    CHECK(first == slurp(tmp.file("c.csv")));
    CHECK(first.find("C1,I,800,400,CC,") != std::string::npos);
}

TEST_CASE("simulate renders every format") {
    const std::vector<std::string> base{"simulate", "--designs", "C1", "--sizes", "I", "--M", "3",
                                        "--estimators", "CC,PS", "--seed", "1", "--format"};
    auto md = base;
    md.push_back("md");
    const Run m = run(md);
    CHECK(m.code == 0);
    CHECK(m.out.find("| C1 | I | 800 | 400 | PS | - | - |") != std::string::npos);

    auto js = base;
    js.push_back("json");
    const Run j = run(js);
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["rows"].size() == 2);
    CHECK(doc["rows"][1]["bias"] == "-");
    CHECK(nlohmann::json::parse(doc.dump()) == doc);
}

TEST_CASE("exit codes") {
    TempDir tmp;
    CHECK(run({"simulate", "--designs", "C7", "--seed", "1"}).code == 2);
    CHECK(run({"simulate", "--designs", "C1"}).code == 2);
    CHECK(run({"simulate", "--seed", "1", "--M", "1"}).code == 2);
    CHECK(run({"simulate", "--seed", "1", "--estimators", "XX"}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"estimate", "--input", tmp.file("missing.csv"), "--response-col", "y"}).code == 2);

    {
        std::ofstream f(tmp.file("bad.csv"));
        f << "x1,y\n0.1,1\nabc,2\n";
    }
    const Run bad = run({"estimate", "--input", tmp.file("bad.csv"), "--response-col", "y"});
    CHECK(bad.code == 3);
    CHECK(bad.err.find("row 2") != std::string::npos);
    {
        std::ofstream f(tmp.file("none.csv"));
        f << "x1,y\n0.1,NA\n0.2,\n";
    }
    CHECK(run({"estimate", "--input", tmp.file("none.csv"), "--response-col", "y"}).code == 3);
    {
        std::ofstream f(tmp.file("good.csv"));
        f << "x1,y\n0.1,1\n0.2,2\n0.3,NA\n0.4,3\n0.5,1\n";
    }
    CHECK(run({"estimate", "--input", tmp.file("good.csv"), "--response-col", "nope"}).code == 2);
    CHECK(run({"estimate", "--input", tmp.file("good.csv"), "--response-col", "y", "--lambda2", "x"}).code == 2);
}

TEST_CASE("estimate") {
    TempDir tmp;
    SUBCASE("fully observed data returns the sample mean") {
        const Matrix x = gen_covariates(80, 5, 3);
        const Vector y = gen_outcome_m1(x, 3);
        write_csv(tmp.file("full.csv"), x, y, Vector::Ones(80));
        const Run r = run({"estimate", "--input", tmp.file("full.csv"), "--response-col", "y", "--seed", "1"});
        REQUIRE(r.code == 0);
        const auto doc = nlohmann::json::parse(r.out);
        CHECK(std::abs(doc["theta"].get<double>() - y.mean()) <= 1e-10);
        CHECK(doc["response_rate"].get<double>() == 1.0);
    }
    SUBCASE("NA and empty encodings agree") {
        const IncompleteDataset d = generate({OutcomeModel::M1, ResponseModel::R1, 150, 8, 4});
        const Vector y_full = d.y.unaryExpr([](double v) { return std::isnan(v) ? 0.0 : v; });
        write_csv(tmp.file("na.csv"), d.x, y_full, d.delta, "NA");
        write_csv(tmp.file("empty.csv"), d.x, y_full, d.delta, "");
        const Run a = run({"estimate", "--input", tmp.file("na.csv"), "--response-col", "y", "--seed", "5"});
        const Run b = run({"estimate", "--input", tmp.file("empty.csv"), "--response-col", "y", "--seed", "5"});
        REQUIRE(a.code == 0);
        CHECK(a.out == b.out);
        const auto doc = nlohmann::json::parse(a.out);
        CHECK(doc["ci"].size() == 2);
        CHECK(doc["selected_covariates"].is_array());
        CHECK(doc["propensity"]["nonzero_groups"].is_array());
        CHECK(doc["response_rate"].get<double>() == doctest::Approx(d.delta.mean()));
    }
    SUBCASE("studentized response is centred over the observed entries") {
        const FullData full = gen_retail_standin(120, 12, 9);
        IncompleteDataset d = IncompleteDataset::from_full(full.x, full.y, gen_mask_app(full.x, 9));
        studentize_dataset(d);
        CHECK(std::abs(d.observed_y().mean()) <= 1e-12);
        CHECK(std::abs(d.x.col(3).mean()) <= 1e-12);
    }
}

TEST_CASE("select") {
    TempDir tmp;
    SUBCASE("M1 signal, 1-indexed output") {
        const Matrix x = gen_covariates(800, 50, 10);
        const Vector y = gen_outcome_m1(x, 10);
        write_csv(tmp.file("m1.csv"), x, y, Vector::Ones(800));
        const Run r = run({"select", "--input", tmp.file("m1.csv"), "--response-col", "y", "--seed", "2"});
        REQUIRE(r.code == 0);
        const auto doc = nlohmann::json::parse(r.out);
        CHECK(doc["norms"].size() == 50);
        CHECK(doc["active"] == nlohmann::json::array({1, 2, 3, 4}));
        CHECK(doc["active_names"] == nlohmann::json::array({"x1", "x2", "x3", "x4"}));
        CHECK(doc["no_signal"] == false);
    }
    SUBCASE("pure noise") {
        const Matrix x = gen_covariates(300, 10, 11);
        const Vector y = oracle::normal_vector(300, 12);
        write_csv(tmp.file("noise.csv"), x, y, Vector::Ones(300));
        const Run r = run({"select", "--input", tmp.file("noise.csv"), "--response-col", "y", "--seed", "3"});
        REQUIRE(r.code == 0);
        const auto doc = nlohmann::json::parse(r.out);
        CHECK(doc["norms"].size() == 10);
        CHECK(doc["active"].empty());
        CHECK(doc["no_signal"] == true);
    }
}

}
