#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gridflow/errors.hpp"

namespace gridflow::info {

struct Message {
    std::string sender;
    std::string receiver;
    std::string payload;     // opaque bytes
    double sent_at = 0.0;    // seconds

    std::uint64_t size_bits() const { return static_cast<std::uint64_t>(payload.size()) * 8; }
};

struct Link {
    std::string from;
    std::string to;
    double bit_rate = 0.0;     // bit/s
    double latency = 0.0;      // s
    double reliability = 1.0;  // delivery probability
    double timeout = 0.0;      // s, measured from sent_at
};

enum class DeliveryStatus { Delivered, Dropped, TimedOut };

const char* to_string(DeliveryStatus s);

struct DeliveryResult {
    DeliveryStatus status = DeliveryStatus::Delivered;
    double at = 0.0;  // resolution time
};

struct Resolution {
    std::uint64_t ticket = 0;
    Message msg;
    DeliveryResult result;
};

/// Logical single-hop message network. Each link serializes transfers FIFO:
/// a message occupies the link for size/bit_rate seconds, then propagates for
/// latency seconds. A transfer whose total time from sent_at would exceed the
/// link timeout resolves TimedOut at sent_at + timeout; otherwise one draw
/// from the owned seeded stream decides Delivered versus Dropped. Dropped
/// messages resolve at their would-be delivery time.
class InfoNetwork {
public:
    explicit InfoNetwork(std::uint64_t seed = 0) : rng_(seed) {}

    void add_link(Link link);
    const Link* find_link(const std::string& from, const std::string& to) const;
    const std::vector<Link>& links() const { return links_; }

    /// Enqueues a message; throws NoRoute without a sender->receiver link.
    /// Exactly one reliability draw is consumed per send.
    std::uint64_t send(Message msg, double now);

    /// Resolves everything due at or before `to`, ordered by (time, ticket).
    std::vector<Resolution> advance(double to);

    double now() const { return now_; }
    std::size_t pending() const { return pending_.size(); }

private:
    double uniform_draw();

    struct Pending {
        std::uint64_t ticket;
        Message msg;
        DeliveryResult result;
    };

    std::vector<Link> links_;
    std::map<std::pair<std::string, std::string>, std::size_t> link_index_;
    std::vector<double> busy_until_;  // per link, end of last serialization
    std::vector<Pending> pending_;
    std::uint64_t next_ticket_ = 1;
    double now_ = 0.0;
    std::mt19937_64 rng_;  // the one seeded stream behind reliability draws
};

}  // namespace gridflow::info
