#include "prestamo/ingest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "prestamo/error.h"

namespace prestamo {

namespace {

constexpr std::size_t kSchemaSample = 1000;

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool in_range(int v, int lo, int hi) { return v >= lo && v <= hi; }

}  // namespace

double AuthorTimeline::span_days() const {
  if (posts.size() < 2) return 0.0;
  return static_cast<double>(posts.back().timestamp - posts.front().timestamp) /
         86400.0;
}

std::optional<std::int64_t> parse_timestamp_string(const std::string& value) {
  int y, mo, d, h, mi, s;
  int consumed = 0;
  if (std::sscanf(value.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h,
                  &mi, &s, &consumed) != 6) {
    return std::nullopt;
  }
  if (!in_range(mo, 1, 12) || !in_range(d, 1, 31) || !in_range(h, 0, 23) ||
      !in_range(mi, 0, 59) || !in_range(s, 0, 60)) {
    return std::nullopt;
  }

  const char* rest = value.c_str() + consumed;
  if (*rest == '.') {  // fractional seconds, ignored
    ++rest;
    if (*rest < '0' || *rest > '9') return std::nullopt;
    while (*rest >= '0' && *rest <= '9') ++rest;
  }

  std::int64_t offset = 0;
  if (*rest == 'Z' || *rest == 'z') {
    ++rest;
  } else if (*rest == '+' || *rest == '-') {
    int oh, om, n = 0;
    if (std::sscanf(rest + 1, "%2d:%2d%n", &oh, &om, &n) != 2 || n != 5 ||
        !in_range(oh, 0, 23) || !in_range(om, 0, 59)) {
      return std::nullopt;
    }
    offset = (*rest == '+' ? 1 : -1) * (oh * 3600 + om * 60);
    rest += 6;
  } else {
    return std::nullopt;
  }
  if (*rest != '\0') return std::nullopt;

  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s - offset;
}

std::optional<Post> parse_post_line(const std::string& line) {
  nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
  if (!obj.is_object()) return std::nullopt;

  Post post;
  auto read_id = [&obj](const char* key, std::string& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (it->is_string()) {
      out = it->get<std::string>();
    } else if (it->is_number_integer() || it->is_number_unsigned()) {
      out = std::to_string(it->get<std::int64_t>());
    } else {
      return false;
    }
    return !out.empty();
  };
  if (!read_id("id", post.id) || !read_id("author_id", post.author_id)) {
    return std::nullopt;
  }

  auto ts = obj.find("timestamp");
  if (ts == obj.end()) return std::nullopt;
  if (ts->is_number_integer() || ts->is_number_unsigned()) {
    post.timestamp = ts->get<std::int64_t>();
  } else if (ts->is_string()) {
    auto parsed = parse_timestamp_string(ts->get<std::string>());
    if (!parsed) return std::nullopt;
    post.timestamp = *parsed;
  } else {
    return std::nullopt;
  }
  if (post.timestamp <= 0) return std::nullopt;

  auto text = obj.find("text");
  if (text == obj.end() || !text->is_string()) return std::nullopt;
  post.text = text->get<std::string>();

  auto rt = obj.find("is_retweet");
  if (rt == obj.end() || !rt->is_boolean()) return std::nullopt;
  post.is_retweet = rt->get<bool>();

  auto loc = obj.find("profile_location");
  if (loc != obj.end() && loc->is_string()) {
    post.profile_location = loc->get<std::string>();
  }
  return post;
}

PostReader::PostReader(const std::string& path)
    : owned_(std::make_unique<std::ifstream>(path)), in_(owned_.get()) {
  if (!static_cast<std::ifstream&>(*owned_).is_open()) {
    throw Error(ErrorCode::Unreadable, "cannot open posts file " + path);
  }
}

PostReader::PostReader(std::unique_ptr<std::istream> in)
    : owned_(std::move(in)), in_(owned_.get()) {}

void PostReader::check_schema(bool at_eof) {
  if (schema_checked_) return;
  if (lines_ < kSchemaSample && !at_eof) return;
  schema_checked_ = true;
  if (lines_ > 0 && sampled_malformed_ * 2 > std::min(lines_, kSchemaSample)) {
    throw Error(ErrorCode::SchemaError,
                std::to_string(sampled_malformed_) + " of the first " +
                    std::to_string(std::min(lines_, kSchemaSample)) +
                    " lines are not valid posts");
  }
}

std::optional<Post> PostReader::next() {
  std::string line;
  while (std::getline(*in_, line)) {
    ++lines_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::optional<Post> post = parse_post_line(line);
    if (!post) {
      ++skipped_;
      if (lines_ <= kSchemaSample) ++sampled_malformed_;
      check_schema(false);
      continue;
    }
    check_schema(false);
    return post;
  }
  check_schema(true);
  return std::nullopt;
}

std::vector<Post> read_posts(const std::string& path, std::size_t* skipped) {
  PostReader reader(path);
  std::vector<Post> posts;
  while (auto post = reader.next()) posts.push_back(std::move(*post));
  if (skipped) *skipped = reader.skipped();
  return posts;
}

std::map<std::string, AuthorTimeline> group_timelines(std::vector<Post> posts) {
  std::map<std::string, AuthorTimeline> timelines;
  for (Post& post : posts) {
    AuthorTimeline& tl = timelines[post.author_id];
    if (tl.author_id.empty()) tl.author_id = post.author_id;
    tl.posts.push_back(std::move(post));
  }
  for (auto& [_, tl] : timelines) {
    std::stable_sort(tl.posts.begin(), tl.posts.end(),
                     [](const Post& a, const Post& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  return timelines;
}

}  // namespace prestamo
