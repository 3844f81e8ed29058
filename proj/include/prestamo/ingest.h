#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace prestamo {

struct Post {
  std::string id;
  std::string author_id;
  std::int64_t timestamp = 0;  // seconds since epoch
  std::string text;
  bool is_retweet = false;
  std::optional<std::string> profile_location;
};

struct AuthorTimeline {
  std::string author_id;
  std::vector<Post> posts;  // ascending by timestamp
  double span_days() const;
};

// Accepts integer epoch seconds or an RFC 3339 string
// ("2021-07-01T12:30:00Z", offsets allowed).
std::optional<std::int64_t> parse_timestamp_string(const std::string& value);

// nullopt when the line is not a valid post.
std::optional<Post> parse_post_line(const std::string& line);

// Streams one JSONL file. Malformed lines are skipped and counted; if more
// than half of the first 1000 lines are malformed the file is rejected.
class PostReader {
 public:
  explicit PostReader(const std::string& path);
  explicit PostReader(std::unique_ptr<std::istream> in);

  std::optional<Post> next();
  std::size_t skipped() const { return skipped_; }
  std::size_t lines_read() const { return lines_; }

 private:
  void check_schema(bool at_eof);

  std::unique_ptr<std::istream> owned_;
  std::istream* in_;
  std::size_t lines_ = 0;
  std::size_t skipped_ = 0;
  std::size_t sampled_malformed_ = 0;
  bool schema_checked_ = false;
};

std::vector<Post> read_posts(const std::string& path, std::size_t* skipped = nullptr);

std::map<std::string, AuthorTimeline> group_timelines(std::vector<Post> posts);

}  // namespace prestamo
