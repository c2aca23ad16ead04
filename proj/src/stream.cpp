#include "fcmon/stream.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "fcmon/errors.hpp"
#include "fcmon/text.hpp"

namespace fcmon {

StreamSet::StreamSet(std::vector<std::string> stream_ids, std::vector<double> values, long batch_size)
    : ids_(std::move(stream_ids)), values_(std::move(values)), batch_size_(batch_size) {
    if (ids_.empty()) throw InvalidArgument("stream set needs at least one stream");
    if (batch_size_ < 1) throw InvalidArgument("batch size must be >= 1");
    if (values_.size() % ids_.size() != 0)
        throw InvalidArgument("value count is not a multiple of the stream count");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidArgument("stream values must be finite");
    n_ticks_ = static_cast<long>(values_.size() / ids_.size());
}

double StreamSet::at(long tick, std::size_t stream) const {
    if (tick < 1 || tick > n_ticks_ || stream >= ids_.size())
        throw InvalidArgument("tick/stream out of range: " + std::to_string(tick));
    return values_[static_cast<std::size_t>(tick - 1) * ids_.size() + stream];
}

std::span<const double> StreamSet::row(long tick) const {
    if (tick < 1 || tick > n_ticks_) throw InvalidArgument("tick out of range: " + std::to_string(tick));
    return {values_.data() + static_cast<std::size_t>(tick - 1) * ids_.size(), ids_.size()};
}

std::vector<double> StreamSet::series(std::size_t stream) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_ticks_));
    for (long t = 1; t <= n_ticks_; ++t) out.push_back(at(t, stream));
    return out;
}

std::size_t StreamSet::index_of(const std::string& id) const {
    for (std::size_t i = 0; i < ids_.size(); ++i)
        if (ids_[i] == id) return i;
    throw InvalidArgument("unknown stream id '" + id + "'");
}

StreamSet StreamSet::with_batch_size(long batch_size) const {
    return StreamSet(ids_, values_, batch_size);
}

std::vector<long> batch_ends(const StreamSet& streams) {
    std::vector<long> out;
    const long B = streams.batch_size();
    for (long b = B; b <= streams.n_ticks(); b += B) out.push_back(b);
    return out;
}

StreamSet ingest_csv(std::istream& in, long batch_size) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;

    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> id_index;
    struct Cell {
        long tick;
        std::size_t stream;
        double value;
        std::size_t line;
    };
    std::vector<Cell> cells;
    long max_tick = 0;

    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        if (!have_header) {
            auto f = split(view, ',');
            if (f.size() != 3 || trim(f[0]) != "tick" || trim(f[1]) != "stream_id" || trim(f[2]) != "value")
                throw ParseError(line_no, "expected header 'tick,stream_id,value'");
            have_header = true;
            continue;
        }
        auto f = split(view, ',');
        if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
        auto tick_s = trim(f[0]);
        auto id = std::string(trim(f[1]));
        auto value_s = trim(f[2]);

        long tick = 0;
        auto [tp, tec] = std::from_chars(tick_s.data(), tick_s.data() + tick_s.size(), tick);
        if (tec != std::errc{} || tp != tick_s.data() + tick_s.size() || tick < 1)
            throw ParseError(line_no, "tick must be a positive integer");
        if (value_s.starts_with('+')) value_s.remove_prefix(1);
        double value = 0.0;
        auto [vp, vec] = std::from_chars(value_s.data(), value_s.data() + value_s.size(), value);
        if (vec != std::errc{} || vp != value_s.data() + value_s.size())
            throw ParseError(line_no, "value is not a number");
        if (!std::isfinite(value)) throw ParseError(line_no, "value is not finite");
        if (id.empty()) throw ParseError(line_no, "empty stream id");

        auto [it, inserted] = id_index.try_emplace(id, ids.size());
        if (inserted) ids.push_back(id);
        cells.push_back({tick, it->second, value, line_no});
        max_tick = std::max(max_tick, tick);
    }
    if (!have_header) throw ParseError(line_no, "missing header");
    if (ids.empty()) throw ParseError(line_no, "no data rows");

    const std::size_t D = ids.size();
    std::vector<double> values(static_cast<std::size_t>(max_tick) * D, 0.0);
    std::vector<char> seen(values.size(), 0);
    for (const auto& c : cells) {
        auto k = static_cast<std::size_t>(c.tick - 1) * D + c.stream;
        if (seen[k]) throw ParseError(c.line, "duplicate cell for tick " + std::to_string(c.tick));
        seen[k] = 1;
        values[k] = c.value;
    }
    for (std::size_t k = 0; k < seen.size(); ++k)
        if (!seen[k]) throw IncompletePanel(static_cast<long>(k / D) + 1, ids[k % D]);

    return StreamSet(std::move(ids), std::move(values), batch_size);
}

StreamSet ingest_csv(const std::filesystem::path& path, long batch_size) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return ingest_csv(in, batch_size);
}

void write_csv(const StreamSet& streams, std::ostream& out) {
    out << "tick,stream_id,value\n";
    for (long t = 1; t <= streams.n_ticks(); ++t) {
        auto row = streams.row(t);
        for (std::size_t i = 0; i < row.size(); ++i)
            out << t << ',' << streams.stream_ids()[i] << ',' << format_double(row[i]) << '\n';
    }
}

void write_csv(const StreamSet& streams, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    write_csv(streams, out);
}

}  // namespace fcmon
