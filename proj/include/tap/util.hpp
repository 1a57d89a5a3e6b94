#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tap {

/// Recoverable input problem (bad file, malformed row, infeasible spec).
/// The CLI maps this to exit code 2; std::logic_error maps to 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

/// Write via a temp file in the same directory, then rename into place.
void atomic_write_file(const std::filesystem::path& path, const void* data, std::size_t size);
void atomic_write_file(const std::filesystem::path& path, const std::string& text);

/// Worker cap: TS_THREADS when set, else hardware concurrency, at least 1.
int worker_count();

/// Run fn(i) for i in [0, n) across worker_count() threads. Exceptions are
/// rethrown on the caller. fn must be safe to call concurrently.
void parallel_for(int n, const std::function<void(int)>& fn);

std::string format_double(double v);  // shortest round-trippable decimal

}  // namespace tap
