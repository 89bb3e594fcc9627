#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gsmpc/errors.hpp"

namespace gsmpc {

/// Uniformly sampled multi-channel time series.
///
/// Channels keep their insertion order, which is also the column order of the
/// CSV writer. All channels share one length.
class Trace {
public:
    Trace() = default;
    explicit Trace(double sample_time, double start_time = 0.0)
        : t_s_(sample_time), t0_(start_time) {
        if (!(sample_time > 0.0)) throw DomainError("trace sample time must be positive");
    }

    double sample_time() const noexcept { return t_s_; }
    double start_time() const noexcept { return t0_; }
    std::size_t size() const noexcept { return channels_.empty() ? 0 : channels_.front().second.size(); }
    bool empty() const noexcept { return size() == 0; }
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * t_s_; }

    void add_channel(std::string name, std::vector<double> values) {
        if (has_channel(name)) throw InputError("duplicate trace channel '" + name + "'");
        if (!channels_.empty() && values.size() != size())
            throw InputError("trace channel '" + name + "' has length " + std::to_string(values.size()) +
                             ", expected " + std::to_string(size()));
        channels_.emplace_back(std::move(name), std::move(values));
    }

    bool has_channel(std::string_view name) const noexcept {
        for (const auto& c : channels_)
            if (c.first == name) return true;
        return false;
    }

    const std::vector<double>& channel(std::string_view name) const {
        for (const auto& c : channels_)
            if (c.first == name) return c.second;
        throw UnknownVariableError(std::string(name));
    }

    std::vector<double>& channel(std::string_view name) {
        for (auto& c : channels_)
            if (c.first == name) return c.second;
        throw UnknownVariableError(std::string(name));
    }

    std::vector<std::string> channel_names() const {
        std::vector<std::string> names;
        names.reserve(channels_.size());
        for (const auto& c : channels_) names.push_back(c.first);
        return names;
    }

    const std::vector<std::pair<std::string, std::vector<double>>>& channels() const noexcept {
        return channels_;
    }

private:
    double t_s_ = 1.0;
    double t0_ = 0.0;
    std::vector<std::pair<std::string, std::vector<double>>> channels_;
};

}  // namespace gsmpc
