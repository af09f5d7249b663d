// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef MADPFI_FETCH_HPP
#define MADPFI_FETCH_HPP

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "madpfi/errors.hpp"

namespace madpfi {

struct FetchSummary {
  std::size_t fetched = 0;
  std::size_t skipped = 0;  // already present in the output directory
  std::size_t failed = 0;
  std::vector<std::string> failures;  // file names that exhausted retries
};

struct FetchOptions {
  double rate_limit_seconds = 1.0;  // min spacing between remote requests
  int attempts = 3;                 // tries per request
  double backoff_initial_seconds = 0.5;  // doubles after each failed try
};

namespace detail {

/// Enforces a minimum interval between remote requests.
class RequestThrottle {
 public:
  explicit RequestThrottle(double min_interval_seconds)
      : interval_(std::chrono::duration<double>(min_interval_seconds)) {}

  void wait() {
    const auto now = std::chrono::steady_clock::now();
    if (armed_ && now < last_ + interval_)
      std::this_thread::sleep_for(last_ + interval_ - now);
    last_ = std::chrono::steady_clock::now();
    armed_ = true;
  }

 private:
  std::chrono::duration<double> interval_;
  std::chrono::steady_clock::time_point last_{};
  bool armed_ = false;
};

struct SplitUrl {
  std::string host_port;  // scheme://host[:port]
  std::string prefix;     // path prefix, no trailing slash
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError("malformed URL '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl s;
  if (path_start == std::string::npos) {
    s.host_port = url;
  } else {
    s.host_port = url.substr(0, path_start);
    s.prefix = url.substr(path_start);
  }
  while (!s.prefix.empty() && s.prefix.back() == '/') s.prefix.pop_back();
  return s;
}

/// GET with retries and exponential backoff. Returns the body on 200.
inline std::optional<std::string> http_get(httplib::Client& cli,
                                           const std::string& path,
                                           RequestThrottle& throttle,
                                           const FetchOptions& opts) {
  double backoff = opts.backoff_initial_seconds;
  for (int attempt = 0; attempt < opts.attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2;
    }
    throttle.wait();
    auto res = cli.Get(path);
    if (res && res->status == 200) return res->body;
  }
  return std::nullopt;
}

inline void write_file_atomic(const std::filesystem::path& dest,
                              const std::string& body) {
  const auto tmp = dest.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out << body;
  }
  std::filesystem::rename(tmp, dest);
}

inline bool is_snapshot_file(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".jsonl" || ext == ".json";
}

}  // namespace detail

/// Materializes snapshot files from `source` into `out_dir`.
///
/// Directory source: copies every snapshot file, skipping names already
/// present (idempotent reruns).
///
/// http(s) source: GETs {base}/index.json, a JSON array of file names, then
/// each file, spacing remote requests at least rate_limit_seconds apart.
/// A file that still fails after `attempts` tries is recorded in the summary
/// and the run continues.
inline FetchSummary fetch_snapshots(const std::string& source,
                                    const std::filesystem::path& out_dir,
                                    const FetchOptions& opts = {}) {
  namespace fs = std::filesystem;
  FetchSummary summary;
  fs::create_directories(out_dir);

  const bool remote = source.rfind("http://", 0) == 0 ||
                      source.rfind("https://", 0) == 0;
  if (!remote) {
    std::error_code ec;
    if (!fs::is_directory(source, ec))
      throw IoError("fetch source '" + source +
                    "' is neither a directory nor an http(s) URL");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(source))
      if (entry.is_regular_file() && detail::is_snapshot_file(entry.path()))
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto dest = out_dir / f.filename();
      if (fs::exists(dest)) {
        ++summary.skipped;
        continue;
      }
      fs::copy_file(f, dest);
      ++summary.fetched;
    }
    return summary;
  }

  if (opts.rate_limit_seconds <= 0)
    throw ValidationError("remote fetch requires a positive rate limit");

  const auto url = detail::split_url(source);
  httplib::Client cli(url.host_port);
  cli.set_connection_timeout(10);
  cli.set_read_timeout(30);
  detail::RequestThrottle throttle(opts.rate_limit_seconds);

  auto index_body =
      detail::http_get(cli, url.prefix + "/index.json", throttle, opts);
  if (!index_body)
    throw IoError("cannot fetch index from '" + source + "/index.json'");
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(*index_body);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid index.json: ") + e.what());
  }
  if (!index.is_array())
    throw ParseError("index.json must be a JSON array of file names");

  for (const auto& entry : index) {
    if (!entry.is_string())
      throw ParseError("index.json entries must be strings");
    const std::string name = entry.get<std::string>();
    const auto dest = out_dir / fs::path(name).filename();
    if (fs::exists(dest)) {
      ++summary.skipped;
      continue;
    }
    auto body = detail::http_get(cli, url.prefix + "/" + name, throttle, opts);
    if (!body) {
      ++summary.failed;
      summary.failures.push_back(name);
      continue;
    }
    detail::write_file_atomic(dest, *body);
    ++summary.fetched;
  }
  return summary;
}

}  // namespace madpfi

#endif  // MADPFI_FETCH_HPP
