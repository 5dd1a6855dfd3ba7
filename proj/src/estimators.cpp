#include "retrial/estimators.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace retrial {

double FrequencyMatrix::level(long k) const {
    const int m = servers();
    if (k < 0) return 0.0;
    return k <= m ? at(static_cast<int>(k), 0) : at(m, k - m);
}

double max_abs_difference(const FrequencyMatrix& a, const FrequencyMatrix& b) {
    if (a.servers() != b.servers()) throw std::invalid_argument("server count mismatch");
    const long width = std::max(a.truncation(), b.truncation());
    double worst = 0.0;
    for (int i = 0; i <= a.servers(); ++i) {
        for (long j = 0; j <= width; ++j) worst = std::max(worst, std::abs(a.at(i, j) - b.at(i, j)));
    }
    return worst;
}

void OccupancyAccumulator::record_sojourn(const QueueState& state, double dt) {
    if (dt < 0.0) throw std::invalid_argument("negative sojourn");
    time_.ref(state.q1, static_cast<std::size_t>(state.q2)) += dt;
    total_ += dt;
}

void OccupancyAccumulator::merge(const OccupancyAccumulator& other) {
    time_.add(other.time_);
    total_ += other.total_;
}

FrequencyMatrix OccupancyAccumulator::frequencies() const {
    const long last = std::max(time_.last_nonzero_column(), 0L);
    FrequencyMatrix p(servers(), last);
    if (total_ <= 0.0) return p;
    for (int i = 0; i <= servers(); ++i) {
        for (long j = 0; j <= last; ++j) p.ref(i, j) = time_.at(i, j) / total_;
    }
    return p;
}

void JumpCounts::record_arrival_jump(const QueueState& pre_jump) {
    ++counts_.ref(pre_jump.q1, static_cast<std::size_t>(pre_jump.q2));
    ++arrivals_;
}

void JumpCounts::merge(const JumpCounts& other) {
    counts_.add(other.counts_);
    arrivals_ += other.arrivals_;
    horizon_ += other.horizon_;
}

JumpFunctional JumpCounts::finalize() const {
    if (!(horizon_ > 0.0)) throw DegenerateRun("jump functional has an empty horizon");
    const long last = std::max(counts_.last_nonzero_column(), 0L);
    StateMatrix<double> values(servers(), static_cast<std::size_t>(last) + 1);
    for (int i = 0; i <= servers(); ++i) {
        for (long j = 0; j <= last; ++j) {
            values.ref(i, static_cast<std::size_t>(j)) = static_cast<double>(counts_.at(i, j)) / horizon_;
        }
    }
    return JumpFunctional(std::move(values), horizon_, arrivals_);
}

OccupancyAccumulator merge(OccupancyAccumulator x, const OccupancyAccumulator& y) {
    x.merge(y);
    return x;
}

JumpCounts merge(JumpCounts x, const JumpCounts& y) {
    x.merge(y);
    return x;
}

long truncation_level(const JumpFunctional& fn, double epsilon) {
    const auto& a = fn.values();
    for (long j = static_cast<long>(a.width()) - 1; j >= 0; --j) {
        for (int i = 0; i <= a.servers(); ++i) {
            if (a.at(i, j) >= epsilon) return j;
        }
    }
    throw DegenerateRun("no jump-functional cell reaches epsilon; the run saw no arrivals");
}

long truncation_level(const JumpFunctional& fn) {
    if (!(fn.horizon() > 0.0)) throw DegenerateRun("jump functional has no horizon");
    return truncation_level(fn, 1.0 / fn.horizon());
}

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct CsvCell {
    int i;
    long j;
    double value;
};

std::vector<CsvCell> read_cells(std::istream& in, std::vector<std::string>* comments) {
    std::vector<CsvCell> cells;
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (comments) comments->push_back(line.substr(1));
            continue;
        }
        if (!header_seen && line.rfind("i,", 0) == 0) {
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string fi, fj, fv;
        if (!std::getline(row, fi, ',') || !std::getline(row, fj, ',') || !std::getline(row, fv)) {
            throw std::runtime_error("malformed csv row " + std::to_string(line_no) + ": " + line);
        }
        try {
            cells.push_back({std::stoi(fi), std::stol(fj), std::stod(fv)});
        } catch (const std::exception&) {
            throw std::runtime_error("malformed csv row " + std::to_string(line_no) + ": " + line);
        }
        if (cells.back().i < 0 || cells.back().j < 0) {
            throw std::runtime_error("negative index in csv row " + std::to_string(line_no));
        }
    }
    if (cells.empty()) throw std::runtime_error("csv contains no cells");
    return cells;
}

StateMatrix<double> to_matrix(const std::vector<CsvCell>& cells) {
    int servers = 1;
    long width = 1;
    for (const auto& c : cells) {
        servers = std::max(servers, c.i);
        width = std::max(width, c.j + 1);
    }
    StateMatrix<double> m(servers, static_cast<std::size_t>(width));
    for (const auto& c : cells) m.ref(c.i, static_cast<std::size_t>(c.j)) = c.value;
    return m;
}

}  // namespace

void write_csv(std::ostream& out, const StateMatrix<double>& cells) {
    out << "i,j,value\n";
    for (int i = 0; i <= cells.servers(); ++i) {
        for (std::size_t j = 0; j < cells.width(); ++j) {
            out << i << ',' << j << ',' << format_value(cells.at(i, static_cast<long>(j))) << '\n';
        }
    }
}

void write_csv(std::ostream& out, const FrequencyMatrix& p) { write_csv(out, p.cells()); }

void write_csv(std::ostream& out, const JumpFunctional& fn) {
    out << "# horizon=" << format_value(fn.horizon()) << " arrivals=" << fn.total_arrivals() << '\n';
    write_csv(out, fn.values());
}

JumpFunctional read_jump_functional_csv(std::istream& in) {
    std::vector<std::string> comments;
    const auto cells = read_cells(in, &comments);
    double horizon = 0.0;
    std::uint64_t arrivals = 0;
    for (const auto& c : comments) {
        std::istringstream words(c);
        std::string word;
        while (words >> word) {
            if (word.rfind("horizon=", 0) == 0) horizon = std::stod(word.substr(8));
            if (word.rfind("arrivals=", 0) == 0) arrivals = std::stoull(word.substr(9));
        }
    }
    return JumpFunctional(to_matrix(cells), horizon, arrivals);
}

FrequencyMatrix read_frequency_csv(std::istream& in) {
    return FrequencyMatrix(to_matrix(read_cells(in, nullptr)));
}

}  // namespace retrial
