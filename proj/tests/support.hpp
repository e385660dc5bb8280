#pragma once

#include "sqlprobe/util.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace sqlprobe::testing {

inline std::filesystem::path fixture(const std::string& relative)
{
  return std::filesystem::path(SQLPROBE_FIXTURE_DIR) / relative;
}

inline std::filesystem::path source_root()
{
  return std::filesystem::path(SQLPROBE_SOURCE_DIR);
}

inline nlohmann::json load_json(const std::filesystem::path& path)
{
  return nlohmann::json::parse(read_file(path));
}

/// "3/4", "1" or "0" as a double.
inline double fraction(const std::string& text)
{
  const auto slash = text.find('/');
  if (slash == std::string::npos) return std::stod(text);
  return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "sqlprobe")
  {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace sqlprobe::testing
