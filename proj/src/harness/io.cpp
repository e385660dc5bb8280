#include "sqlprobe/harness.hpp"

#include "sqlprobe/util.hpp"

#include <algorithm>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <thread>

namespace sqlprobe {

void run_ordered(std::size_t n, int parallelism, const std::function<UnitResult(std::size_t)>& work,
                 const std::function<void(std::size_t, UnitResult&)>& commit)
{
  if (n == 0) return;
  const auto n_workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), 1, n);

  std::vector<std::optional<UnitResult>> slots(n);
  std::mutex mutex;
  std::condition_variable ready;
  std::size_t next = 0;

  const auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mutex);
        if (next >= n) return;
        i = next++;
      }
      UnitResult result;
      try {
        result = work(i);
      } catch (const std::exception& e) {
        result = {{}, e.what()};
      } catch (...) {
        result = {{}, "unknown error"};
      }
      {
        std::lock_guard lock(mutex);
        slots[i] = std::move(result);
      }
      ready.notify_all();
    }
  };

  std::vector<std::jthread> threads;
  threads.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);

  for (std::size_t i = 0; i < n; ++i) {
    UnitResult result;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return slots[i].has_value(); });
      result = std::move(*slots[i]);
      slots[i].reset();
    }
    commit(i, result);
  }
}

JsonlAppender::JsonlAppender(std::filesystem::path path, KeyFn key) : path_(std::move(path)), key_(std::move(key))
{
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  if (!std::filesystem::exists(path_)) {
    std::ofstream create(path_, std::ios::binary);
    if (!create) throw std::runtime_error("cannot create " + path_.string());
    return;
  }

  const auto content = read_file(path_);
  const auto last_newline = content.rfind('\n');
  const std::size_t complete = last_newline == std::string::npos ? 0 : last_newline + 1;
  if (complete < content.size()) std::filesystem::resize_file(path_, complete);

  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < complete) {
    const auto end = content.find('\n', start);
    ++line_no;
    const auto line = std::string_view(content).substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) continue;
    try {
      keys_.insert(key_(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path_.string() + ":" + std::to_string(line_no) + ": unreadable line: " + e.what());
    }
  }
}

void JsonlAppender::append(const std::string& line)
{
  keys_.insert(key_(nlohmann::json::parse(line)));
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path_.string());
}

std::string unit_key(std::string_view example_id, int variant_index)
{
  return std::string(example_id) + "#" + std::to_string(variant_index);
}

std::string csv_field(std::string_view value)
{
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace stage_files {

std::string passk_records(PassKDirection direction)
{
  return "passk_" + std::string(to_string(direction)) + ".jsonl";
}

std::string passk_summary(PassKDirection direction)
{
  return "passk_" + std::string(to_string(direction)) + ".json";
}

}  // namespace stage_files

}  // namespace sqlprobe
