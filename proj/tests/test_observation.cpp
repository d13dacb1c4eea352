// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "v6drift/observation.hpp"

using namespace v6drift;
using namespace v6drift::test;

TEST_SUITE_BEGIN("observation");

namespace {

Observation random_obs(std::mt19937_64& rng) {
    Observation obs;
    obs.ts = double(rng() % 100000000) / 1000.0;
    obs.run = "run" + std::to_string(rng() % 100);
    obs.target = random_addr(rng);
    obs.cls = static_cast<ResponseClass>(rng() % 6);
    if (obs.cls != ResponseClass::Silent)
        obs.responder = random_addr(rng);
    return obs;
}

}  // namespace

TEST_CASE("response class names round trip") {
    for (int i = 0; i < 6; ++i) {
        auto cls = static_cast<ResponseClass>(i);
        auto back = response_class_from_string(to_string(cls));
        REQUIRE(back);
        CHECK(*back == cls);
    }
    CHECK(!response_class_from_string("bogus"));
}

TEST_CASE("jsonl and csv round trips are bit exact") {
    std::mt19937_64 rng(51);
    for (int i = 0; i < 10000; ++i) {
        Observation obs = random_obs(rng);

        std::string line = observation_to_jsonl(obs);
        auto parsed = observation_from_jsonl(line);
        REQUIRE(parsed);
        REQUIRE(*parsed == obs);
        REQUIRE(observation_to_jsonl(*parsed) == line);  // byte-for-byte

        std::string csv = observation_to_csv(obs);
        auto parsed_csv = observation_from_csv(csv);
        REQUIRE(parsed_csv);
        REQUIRE(*parsed_csv == obs);
        REQUIRE(observation_to_csv(*parsed_csv) == csv);
    }
}

TEST_CASE("silent observations carry no responder field") {
    Observation obs;
    obs.ts = 1.5;
    obs.run = "r";
    obs.target = addr("2001:db8::1");
    obs.cls = ResponseClass::Silent;
    std::string line = observation_to_jsonl(obs);
    CHECK(line.find("\"responder\":null") != std::string::npos);
    std::string csv = observation_to_csv(obs);
    CHECK(csv.find(",,silent") != std::string::npos);
}

TEST_CASE("malformed lines are rejected") {
    CHECK(!observation_from_jsonl(""));
    CHECK(!observation_from_jsonl("{}"));
    CHECK(!observation_from_jsonl("{\"ts\":1.0}"));
    CHECK(!observation_from_jsonl(
        "{\"ts\":1.000000,\"run\":\"r\",\"target\":\"zz\",\"responder\":null,\"class\":\"silent\"}"));
    CHECK(!observation_from_csv("1.0,run,2001:db8::1,"));
    CHECK(!observation_from_csv("1.0,run,2001:db8::1,,nope"));
}

TEST_CASE("log writer and reader round trip through a file") {
    TempDir dir("obslog");
    std::string path = dir.path() + "/log.jsonl";
    std::mt19937_64 rng(53);
    std::vector<Observation> written;
    {
        ObservationLogWriter writer(path);
        for (int i = 0; i < 500; ++i) {
            written.push_back(random_obs(rng));
            writer.write(written.back());
        }
        CHECK(writer.written() == 500);
    }
    auto read = read_observation_log(path);
    REQUIRE(read.size() == written.size());
    CHECK(read == written);

    // Appending keeps existing content.
    {
        ObservationLogWriter writer(path, /*append=*/true);
        written.push_back(random_obs(rng));
        writer.write(written.back());
    }
    CHECK(read_observation_log(path) == written);

    std::string csv_path = dir.path() + "/log.csv";
    write_observation_csv(csv_path, written);
    CHECK(read_observation_csv(csv_path) == written);
}

TEST_SUITE_END();
