#include <doctest.h>

#include <cmath>
#include <sstream>

#include "panelcf/panel.hpp"

using namespace panelcf;

namespace {

Panel from_long(const std::string& csv) {
    std::istringstream in(csv);
    return load_panel(in, PanelFormat::Long);
}

Panel from_wide(const std::string& csv) {
    std::istringstream in(csv);
    return load_panel(in, PanelFormat::Wide);
}

}  // namespace

TEST_CASE("long format assembles the grid") {
    const Panel p = from_long("unit,period,value\nA,1,1.0\nA,2,2.0\nB,1,3.0\nB,2,4.0\n");
    REQUIRE(p.n_units() == 2);
    REQUIRE(p.n_periods() == 2);
    CHECK(p.values(0, 0) == 1.0);
    CHECK(p.values(0, 1) == 2.0);
    CHECK(p.values(1, 0) == 3.0);
    CHECK(p.values(1, 1) == 4.0);
    CHECK(p.unit_labels == std::vector<std::string>{"A", "B"});
    CHECK(p.period_labels == std::vector<std::string>{"1", "2"});
}

TEST_CASE("long format orders rows by first appearance and sorts periods numerically") {
    const Panel p = from_long("unit,period,value\nB,10,1\nB,2,2\nA,2,3\nA,10,4\n");
    CHECK(p.unit_labels == std::vector<std::string>{"B", "A"});
    CHECK(p.period_labels == std::vector<std::string>{"2", "10"});
    CHECK(p.values(0, 0) == 2.0);
    CHECK(p.values(1, 1) == 4.0);
}

TEST_CASE("duplicate cell is rejected") {
    CHECK_THROWS_AS(from_long("unit,period,value\nA,1,1\nA,2,2\nB,1,3\nB,2,4\nB,2,4\n"),
                    DuplicateCell);
}

TEST_CASE("missing cell is rejected") {
    CHECK_THROWS_AS(from_long("unit,period,value\nA,1,1\nA,2,2\nB,1,3\n"), IncompletePanel);
}

TEST_CASE("non-numeric value is rejected") {
    CHECK_THROWS_AS(from_long("unit,period,value\nA,1,abc\nA,2,2\nB,1,3\nB,2,4\n"), ParseError);
}

TEST_CASE("wide and long loads of the same data agree") {
    const Panel pl = from_long("unit,period,value\nA,1,1\nA,2,2\nB,1,3\nB,2,4\n");
    const Panel pw = from_wide("unit,1,2\nA,1,2\nB,3,4\n");
    CHECK(pl.values == pw.values);
    CHECK(pl.unit_labels == pw.unit_labels);
    CHECK(pl.period_labels == pw.period_labels);
}

TEST_CASE("wide format rejects ragged rows") {
    CHECK_THROWS_AS(from_wide("unit,1,2\nA,1\nB,3,4\n"), IncompletePanel);
}

TEST_CASE("a 51x270 grid loads with the right shape") {
    std::ostringstream csv;
    csv << "unit,period,value\n";
    for (int i = 0; i < 51; ++i)
        for (int t = 0; t < 270; ++t)
            csv << "S" << i << ',' << t + 1 << ',' << (i + 0.25 * t) << '\n';
    const Panel p = from_long(csv.str());
    CHECK(p.n_units() == 51);
    CHECK(p.n_periods() == 270);
}

TEST_CASE("level transform is the identity") {
    const Panel p = from_long("unit,period,value\nA,1,1\nA,2,2\nB,1,3\nB,2,4\n");
    const Panel q = transform(p, OutcomeTransform::Level);
    CHECK(q.values == p.values);
}

TEST_CASE("growth transform is the exact percent change") {
    const Panel p = from_wide("unit,1,2,3\nA,100,110,121\nB,200,220,242\n");
    const Panel g = transform(p, OutcomeTransform::Growth);
    REQUIRE(g.n_periods() == 2);
    CHECK(g.values(0, 0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(g.values(0, 1) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(g.period_labels == std::vector<std::string>{"2", "3"});
}

TEST_CASE("log transform is the elementwise natural log") {
    const double e = std::exp(1.0);
    Panel p;
    p.values.resize(2, 2);
    p.values << e, e * e, e * e * e, e;
    p.unit_labels = {"A", "B"};
    p.period_labels = {"1", "2"};
    const Panel l = transform(p, OutcomeTransform::Log);
    CHECK(l.values(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l.values(0, 1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(l.values(1, 0) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("exp undoes log to 1e-12 relative error") {
    const Panel p = from_wide("unit,1,2,3\nA,0.5,110,3.25\nB,200,0.031,242\n");
    const Panel l = transform(p, OutcomeTransform::Log);
    const Eigen::MatrixXd back = l.values.array().exp().matrix();
    CHECK(((back - p.values).cwiseAbs().array() / p.values.cwiseAbs().array()).maxCoeff() <
          1e-12);
}

TEST_CASE("log rejects non-positive values") {
    const Panel p = from_wide("unit,1,2\nA,1,0\nB,2,3\n");
    CHECK_THROWS_AS(transform(p, OutcomeTransform::Log), DomainError);
}

TEST_CASE("growth rejects zero denominators and too-short panels") {
    const Panel zero_denom = from_wide("unit,1,2,3\nA,0,1,2\nB,1,2,3\n");
    CHECK_THROWS_AS(transform(zero_denom, OutcomeTransform::Growth), DomainError);
    const Panel two_periods = from_wide("unit,1,2\nA,1,2\nB,3,4\n");
    CHECK_THROWS_AS(transform(two_periods, OutcomeTransform::Growth), DomainError);
}

TEST_CASE("restrict hides exactly one cell and truncates to the period") {
    const Panel p = from_wide("unit,1,2,3,4\nA,1,2,3,4\nB,5,6,7,8\nC,9,10,11,12\n");
    const MaskedPanel mp = restrict(p, 1, 3);
    CHECK(mp.n_units() == 3);
    CHECK(mp.n_periods() == 4);
    CHECK(mp.target.unit == 1);
    CHECK(mp.target.period == 3);
    CHECK(mp.visible.count() == 11);
    CHECK_FALSE(mp.visible(1, 3));

    const MaskedPanel shorter = restrict(p, 0, 2);
    CHECK(shorter.n_periods() == 3);
    CHECK(shorter.panel.period_labels == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("restrict on the first period has no history") {
    const Panel p = from_wide("unit,1,2\nA,1,2\nB,3,4\n");
    CHECK_THROWS_AS(restrict(p, 0, 0), InsufficientHistory);
}

TEST_CASE("restrict physically drops later periods, so poisoning them is inert") {
    const Panel p = from_wide("unit,1,2,3,4\nA,1,2,3,4\nB,5,6,7,8\n");
    Panel poisoned = p;
    poisoned.values.col(3).setConstant(1e300);
    const MaskedPanel a = restrict(p, 0, 2);
    const MaskedPanel b = restrict(poisoned, 0, 2);
    CHECK(a.panel.values == b.panel.values);
}

TEST_CASE("csv round trip preserves the panel exactly") {
    const Panel p = from_wide("unit,1,2,3\nA,0.1,2.25e-3,3\nB,4,5,6.5\n");
    std::ostringstream out;
    write_panel_csv(out, p);
    const Panel q = from_long(out.str());
    CHECK(p.values == q.values);
    CHECK(p.unit_labels == q.unit_labels);
}
