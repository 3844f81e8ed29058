#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "prestamo/error.h"
#include "prestamo/langid.h"

using namespace prestamo;

namespace {

std::vector<std::pair<std::string, std::string>> tiny_corpus() {
  return {
      {"hola que tal estamos hoy", "es"},
      {"muchas gracias por todo amigo", "es"},
      {"vamos a la playa esta tarde", "es"},
      {"no puedo creer lo que pasa", "es"},
      {"el tiempo está muy bueno hoy", "es"},
      {"the weather is nice today", "en"},
      {"thank you so much my friend", "en"},
      {"we are going to the beach", "en"},
      {"i cannot believe what happened", "en"},
      {"this is a very good time", "en"},
  };
}

Post make_post(const std::string& id, std::int64_t ts, const std::string& text) {
  Post p;
  p.id = id;
  p.author_id = "a";
  p.timestamp = ts;
  p.text = text;
  return p;
}

std::string scratch_path(const std::string& name) {
  std::filesystem::create_directories(PRESTAMO_SCRATCH_DIR);
  return std::string(PRESTAMO_SCRATCH_DIR) + "/" + name;
}

}  // namespace

TEST_SUITE("langid") {

TEST_CASE("training separates obvious classes") {
  LanguageModel model = train_language_model(tiny_corpus(), 3, 0.5);
  CHECK(model.classes == std::vector<std::string>{"en", "es"});

  Classification es = classify(model, "gracias amigo vamos hoy");
  CHECK(es.language == "es");
  CHECK(es.confidence > 0.5);
  CHECK(es.confidence <= 1.0);

  Classification en = classify(model, "the friend is going today");
  CHECK(en.language == "en");
  CHECK(en.confidence > 0.5);
}

TEST_CASE("confidences over the classes sum to one") {
  LanguageModel model = train_language_model(tiny_corpus());
  Classification c = classify(model, "playa beach hoy today");
  CHECK(c.confidence >= 1.0 / 2.0);  // argmax of a two-class posterior
  CHECK(c.confidence <= 1.0);
}

TEST_CASE("training input is validated") {
  CHECK_THROWS_AS(train_language_model(tiny_corpus(), 0), Error);
  CHECK_THROWS_AS(train_language_model(tiny_corpus(), 5), Error);
  CHECK_THROWS_AS(train_language_model(tiny_corpus(), 3, 0.0), Error);
  CHECK_THROWS_AS(train_language_model(tiny_corpus(), 3, -1.0), Error);
  try {
    train_language_model({{"solo una clase", "es"}});
    FAIL("expected InsufficientClasses");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientClasses);
  }
}

TEST_CASE("classifying a blank text is an error") {
  LanguageModel model = train_language_model(tiny_corpus());
  CHECK_THROWS_AS(classify(model, ""), Error);
  CHECK_THROWS_AS(classify(model, "   \t"), Error);
}

TEST_CASE("the model file round-trips exactly") {
  LanguageModel model = train_language_model(tiny_corpus(), 2, 0.25);
  std::string path = scratch_path("langid_roundtrip.tsv");
  save_language_model(model, path);
  LanguageModel loaded = load_language_model(path);

  CHECK(loaded.ngram_order == model.ngram_order);
  CHECK(loaded.alpha == model.alpha);
  CHECK(loaded.classes == model.classes);
  CHECK(loaded.log_priors == model.log_priors);
  CHECK(loaded.unk_log_likelihood == model.unk_log_likelihood);
  REQUIRE(loaded.gram_log_likelihood.size() == model.gram_log_likelihood.size());
  for (const auto& [gram, logp] : model.gram_log_likelihood) {
    auto it = loaded.gram_log_likelihood.find(gram);
    REQUIRE(it != loaded.gram_log_likelihood.end());
    CHECK(it->second == logp);
  }

  Classification before = classify(model, "vamos a la playa amigo");
  Classification after = classify(loaded, "vamos a la playa amigo");
  CHECK(before.language == after.language);
  CHECK(before.confidence == after.confidence);
}

TEST_CASE("loading a missing or truncated model fails loudly") {
  CHECK_THROWS_AS(load_language_model("/nonexistent/model.tsv"), Error);
  std::string path = scratch_path("langid_bad.tsv");
  {
    std::ofstream out(path);
    out << "gibberish row\n";
  }
  CHECK_THROWS_AS(load_language_model(path), Error);
}

TEST_CASE("spanish_rate gates on post count and confidence") {
  LanguageModel model = train_language_model(tiny_corpus());

  AuthorTimeline short_timeline;
  short_timeline.author_id = "a";
  for (int i = 0; i < 4; ++i) {
    short_timeline.posts.push_back(make_post("p" + std::to_string(i), i + 1,
                                             "hola que tal amigo"));
  }
  CHECK_FALSE(spanish_rate(model, short_timeline).has_value());

  AuthorTimeline mixed;
  mixed.author_id = "b";
  mixed.posts.push_back(make_post("q1", 1, "hola que tal estamos amigo"));
  mixed.posts.push_back(make_post("q2", 2, "vamos a la playa esta tarde"));
  mixed.posts.push_back(make_post("q3", 3, "muchas gracias por todo"));
  mixed.posts.push_back(make_post("q4", 4, "the weather is nice today"));
  mixed.posts.push_back(make_post("q5", 5, "thank you so much friend"));

  // A confidence bar nothing clears leaves the rate undefined.
  CHECK_FALSE(spanish_rate(model, mixed, 2.0).has_value());

  // A bar everything clears counts all five posts.
  auto rate = spanish_rate(model, mixed, 0.0);
  REQUIRE(rate.has_value());
  CHECK(*rate == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("blank posts are skipped, retweets count like any post") {
  LanguageModel model = train_language_model(tiny_corpus());
  AuthorTimeline timeline;
  timeline.author_id = "c";
  for (int i = 0; i < 5; ++i) {
    timeline.posts.push_back(
        make_post("p" + std::to_string(i), i + 1, "hola que tal amigo hoy"));
  }
  Post rt = make_post("rt", 10, "the weather is nice today friend");
  rt.is_retweet = true;
  timeline.posts.push_back(rt);
  timeline.posts.push_back(make_post("blank", 11, "   "));

  auto rate = spanish_rate(model, timeline, 0.0);
  REQUIRE(rate.has_value());
  CHECK(*rate == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("the shipped model recognizes casual spanish and english") {
  LanguageModel model =
      load_language_model(std::string(PRESTAMO_DATA_DIR) + "/langid/model.tsv");
  CHECK(model.classes == std::vector<std::string>{"en", "es", "pt"});

  Classification es = classify(model, "jajaja q risa me dio eso");
  CHECK(es.language == "es");
  CHECK(es.confidence > 0.9);

  Classification en = classify(model, "lol that was so funny i cant");
  CHECK(en.language == "en");
  CHECK(en.confidence > 0.9);

  Classification pt = classify(model, "kkkk muito engraçado isso aí");
  CHECK(pt.language == "pt");
}

}  // TEST_SUITE
