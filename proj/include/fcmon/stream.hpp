#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fcmon {

/// D aligned real-valued streams on a shared 1-based tick index.
///
/// Values are stored tick-major (row t holds all D streams at tick t), so the
/// cross-section needed for lagged features is contiguous. Immutable after
/// construction.
class StreamSet {
public:
    StreamSet() = default;

    /// `values` is tick-major, size T*D. Throws InvalidArgument on a shape
    /// mismatch, non-finite entries, or batch_size < 1.
    StreamSet(std::vector<std::string> stream_ids, std::vector<double> values, long batch_size);

    std::size_t n_streams() const noexcept { return ids_.size(); }
    long n_ticks() const noexcept { return n_ticks_; }
    long batch_size() const noexcept { return batch_size_; }
    const std::vector<std::string>& stream_ids() const noexcept { return ids_; }

    /// Value of stream `stream` at 1-based tick `tick`.
    double at(long tick, std::size_t stream) const;

    /// All streams at 1-based tick `tick`.
    std::span<const double> row(long tick) const;

    /// Copy of one stream as a contiguous series (index 0 holds tick 1).
    std::vector<double> series(std::size_t stream) const;

    std::size_t index_of(const std::string& id) const;

    /// Same streams re-cut into batches of a different size.
    StreamSet with_batch_size(long batch_size) const;

    const std::vector<double>& raw() const noexcept { return values_; }

    friend bool operator==(const StreamSet&, const StreamSet&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<double> values_;
    long n_ticks_ = 0;
    long batch_size_ = 1;
};

/// A batch-end tick and the number of steps forecast past it.
struct BatchWindow {
    long batch_end = 0;
    long horizon = 1;
};

/// Ticks b with b mod B == 0 and b <= T, ascending. Trailing partial batches
/// are not included.
std::vector<long> batch_ends(const StreamSet& streams);

/// Reads the long-format `tick,stream_id,value` CSV. Streams keep the order
/// of their first appearance; ticks must cover 1..T for every stream.
StreamSet ingest_csv(const std::filesystem::path& path, long batch_size);
StreamSet ingest_csv(std::istream& in, long batch_size);

/// Writes the long-format CSV, tick-major. Values round-trip exactly.
void write_csv(const StreamSet& streams, std::ostream& out);
void write_csv(const StreamSet& streams, const std::filesystem::path& path);

}  // namespace fcmon
