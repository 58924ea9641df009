#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "hjred/model.hpp"

using namespace hjred;

namespace {

std::string models_dir() {
    if (const char* d = std::getenv("HJRED_MODELS")) return d;
    return "models";
}

} // namespace

TEST_CASE("builtin models load and validate") {
    auto ms = builtin_models();
    REQUIRE(ms.size() == 3);
    CHECK(ms[0].coordinates.size() == 5);
    CHECK(ms[1].coordinates.size() == 2);
    CHECK(ms[2].coordinates.size() == 2);
    CHECK(ms[0].name == "relativistic-particle");
    CHECK(ms[1].name == "disc");
    CHECK(ms[2].name == "punctured-plane");

    // disc Lagrangian is the expected expression
    const Model& disc = ms[1];
    CHECK(disc.lagrangian ==
          parse("q1_d^2/(4*q2) - q2*(q1^2 + q2^2/3 - R^2)", *disc.table));

    // the third system differs from the second only by the sign of the
    // cubic term: L2 - L3 = -(2/3) q2^3
    const Model& punct = ms[2];
    Expr l3_in_disc_table = parse(to_string(punct.lagrangian, *punct.table), *disc.table);
    CHECK(sub(disc.lagrangian, l3_in_disc_table) == parse("-2/3*q2^3", *disc.table));
}

TEST_CASE("bundled model files match the builtins") {
    auto ms = builtin_models();
    Model p = load_model(models_dir() + "/relativistic_particle.hj");
    Model d = load_model(models_dir() + "/disc.hj");
    Model pp = load_model(models_dir() + "/punctured_plane.hj");
    CHECK(to_string(p.lagrangian, *p.table) ==
          to_string(ms[0].lagrangian, *ms[0].table));
    CHECK(to_string(d.lagrangian, *d.table) ==
          to_string(ms[1].lagrangian, *ms[1].table));
    CHECK(to_string(pp.lagrangian, *pp.table) ==
          to_string(ms[2].lagrangian, *ms[2].table));
    CHECK(d.assumptions.size() == 1);
    CHECK(d.constant_value(*d.table->find("R")) == 1.0);
}

TEST_CASE("load errors name the offender and its location") {
    const char* undeclared = R"(name broken
coordinate q1 q2
lagrangian q1_d^2/2 + q3
)";
    try {
        load_model_text(undeclared, "broken.hj");
        FAIL("expected a ModelError");
    } catch (const ModelError& e) {
        std::string msg = e.what();
        CHECK(msg.find("q3") != std::string::npos);
        CHECK(msg.find("broken.hj:3") != std::string::npos);
    }

    CHECK_THROWS_AS(load_model_text("name dup\ncoordinate q1 q1\nlagrangian q1_d^2/2\n"),
                    ModelError);
    CHECK_THROWS_AS(load_model_text("name t-dep\ncoordinate q1\ntime t\n"
                                    "lagrangian q1_d^2/2 + t\n"),
                    ModelError);
    CHECK_THROWS_AS(load_model_text("name empty\nlagrangian 1\n"), ModelError);
    CHECK_THROWS_AS(load_model_text("name nolag\ncoordinate q1\n"), ModelError);
    CHECK_THROWS_AS(load_model_text("name mom\ncoordinate q1\nlagrangian q1_p^2\n"),
                    ModelError);
    CHECK_THROWS_AS(load_model(models_dir() + "/no_such_model.hj"), ModelError);
}

TEST_CASE("serialization round trip preserves normal forms") {
    for (const Model& m : builtin_models()) {
        Model again = load_model_text(save_model(m), "roundtrip");
        CHECK(again.name == m.name);
        CHECK(again.coordinates.size() == m.coordinates.size());
        CHECK(to_string(again.lagrangian, *again.table) ==
              to_string(m.lagrangian, *m.table));
        CHECK(again.assumptions.size() == m.assumptions.size());
        Model third = load_model_text(save_model(again), "roundtrip2");
        CHECK(save_model(third) == save_model(again));
    }
}
