#include "doctest.h"

#include "stirlab/io.hpp"

#include <clocale>
#include <cstdlib>
#include <sstream>

using namespace stirlab;

TEST_CASE("doubles round-trip through 17 digits")
{
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
        CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("snapshot CSV header and columns")
{
    Snapshot s{1.5, 0.25, 0.0, Vec{1, 2}, Vec{3, 4}, Vec{5, 6}, Vec{7, 8}, Vec{9, 10}};
    std::ostringstream os;
    write_snapshots_csv(os, {s}, 2);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    CHECK(header == "t,LX,LY,Bx,By,Xx,Xy,Yx,Yy,fXx,fXy,fYx,fYy");
    CHECK(row == "1.5,0.25,0,1,2,3,4,5,6,7,8,9,10");
}

TEST_CASE("histogram and excursion CSV headers")
{
    std::ostringstream h;
    write_histogram_csv(h, {0.0}, {1.0}, {3.0});
    CHECK(h.str() == "bin_lo,bin_hi,count\n0,1,3\n");

    ExcursionRecord r;
    r.start = Vec{1, 0};
    r.end = Vec{0, 1};
    r.zeta = 2.0;
    r.max_radius = 3.0;
    std::ostringstream e;
    write_excursions_csv(e, {r}, 2);
    std::string header = e.str().substr(0, e.str().find('\n'));
    CHECK(header == "t_start,startx,starty,endx,endy,zeta,max_radius,which_ball,censored");
}

TEST_CASE("report entries use snake_case keys")
{
    ReportEntry e;
    e.test_id = "x";
    e.statistic = 0.5;
    e.p_value = 0.2;
    e.pass = true;
    e.n = 10;
    const auto j = to_json(e);
    for (const char *k : {"test_id", "statistic", "p_value", "pass", "n", "params"})
        CHECK(j.contains(k));
    SimConfig c;
    const auto cj = to_json(c);
    CHECK(cj.contains("tol_overlap"));
    CHECK(cj.contains("max_contact_iters"));
}
