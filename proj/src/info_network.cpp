#include "gridflow/info/network.hpp"

#include <algorithm>
#include <cmath>

namespace gridflow::info {

const char* to_string(DeliveryStatus s) {
    switch (s) {
        case DeliveryStatus::Delivered: return "delivered";
        case DeliveryStatus::Dropped: return "dropped";
        case DeliveryStatus::TimedOut: return "timed_out";
    }
    return "?";
}

void InfoNetwork::add_link(Link link) {
    if (link.bit_rate <= 0.0) throw Error("link bit_rate must be positive");
    if (link.reliability < 0.0 || link.reliability > 1.0)
        throw Error("link reliability must be in [0,1]");
    if (link.latency < 0.0) throw Error("link latency must be nonnegative");
    if (link.timeout <= link.latency) throw Error("link timeout must exceed latency");
    std::pair<std::string, std::string> key{link.from, link.to};
    if (link_index_.count(key))
        throw Error("duplicate link " + link.from + "->" + link.to);
    link_index_.emplace(std::move(key), links_.size());
    links_.push_back(std::move(link));
    busy_until_.push_back(0.0);
}

const Link* InfoNetwork::find_link(const std::string& from, const std::string& to) const {
    auto it = link_index_.find({from, to});
    return it == link_index_.end() ? nullptr : &links_[it->second];
}

double InfoNetwork::uniform_draw() {
    // 53-bit uniform in [0,1); implementation-independent for a fixed seed
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

std::uint64_t InfoNetwork::send(Message msg, double now) {
    if (msg.sender == msg.receiver) throw Error("message sender equals receiver");
    auto it = link_index_.find({msg.sender, msg.receiver});
    if (it == link_index_.end())
        throw NoRoute("no link " + msg.sender + "->" + msg.receiver);
    const std::size_t li = it->second;
    const Link& link = links_[li];

    msg.sent_at = now;
    const double start = std::max(now, busy_until_[li]);
    const double serialized = start + static_cast<double>(msg.size_bits()) / link.bit_rate;
    busy_until_[li] = serialized;
    const double would_deliver = serialized + link.latency;
    const double draw = uniform_draw();

    Pending p;
    p.ticket = next_ticket_++;
    if (would_deliver - msg.sent_at > link.timeout) {
        p.result = {DeliveryStatus::TimedOut, msg.sent_at + link.timeout};
    } else if (draw < link.reliability) {
        p.result = {DeliveryStatus::Delivered, would_deliver};
    } else {
        p.result = {DeliveryStatus::Dropped, would_deliver};
    }
    p.msg = std::move(msg);
    pending_.push_back(std::move(p));
    return pending_.back().ticket;
}

std::vector<Resolution> InfoNetwork::advance(double to) {
    if (to < now_) throw Error("advance target precedes current time");
    std::vector<Resolution> due;
    auto split = std::stable_partition(pending_.begin(), pending_.end(),
                                       [to](const Pending& p) { return p.result.at > to; });
    for (auto it = split; it != pending_.end(); ++it)
        due.push_back({it->ticket, std::move(it->msg), it->result});
    pending_.erase(split, pending_.end());
    std::sort(due.begin(), due.end(), [](const Resolution& a, const Resolution& b) {
        if (a.result.at != b.result.at) return a.result.at < b.result.at;
        return a.ticket < b.ticket;
    });
    now_ = to;
    return due;
}

}  // namespace gridflow::info
