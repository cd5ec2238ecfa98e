#include "gridflow/pay/ledger.hpp"

namespace gridflow::pay {

Ledger::Ledger(std::string fee_sink) : fee_sink_(std::move(fee_sink)) {
    balances_.emplace(fee_sink_, Money());
}

void Ledger::open_account(const std::string& id, Money initial) {
    auto [it, inserted] = balances_.emplace(id, initial);
    if (!inserted) throw Error("account already open: " + id);
}

Money Ledger::balance(const std::string& id) const {
    auto it = balances_.find(id);
    if (it == balances_.end()) throw UnknownAccount("no account: " + id);
    return it->second;
}

void Ledger::apply(const Transaction& tx) {
    if (tx.from == tx.to) throw Error("transaction from == to");
    if (tx.amount <= Money()) throw Error("transaction amount must be positive");
    if (tx.fee < Money()) throw Error("transaction fee must be nonnegative");
    auto from = balances_.find(tx.from);
    if (from == balances_.end()) throw UnknownAccount("no account: " + tx.from);
    auto to = balances_.find(tx.to);
    if (to == balances_.end()) throw UnknownAccount("no account: " + tx.to);

    const Money debit = tx.amount + tx.fee;
    if (from->second < debit)
        throw InsufficientFunds("account " + tx.from + " holds " + from->second.str() +
                                ", needs " + debit.str());
    from->second -= debit;
    to->second += tx.amount;
    balances_[fee_sink_] += tx.fee;
    log_.push_back(tx);
}

Money Ledger::net_position(const std::string& id, double begin, double end) const {
    if (!has_account(id)) throw UnknownAccount("no account: " + id);
    Money net;
    for (const Transaction& tx : log_) {
        if (tx.at < begin || tx.at > end) continue;
        if (tx.from == id) net -= tx.amount + tx.fee;
        if (tx.to == id) net += tx.amount;
        if (id == fee_sink_) net += tx.fee;
    }
    return net;
}

Money Ledger::flow_between(const std::string& a, const std::string& b) const {
    if (!has_account(a)) throw UnknownAccount("no account: " + a);
    if (!has_account(b)) throw UnknownAccount("no account: " + b);
    Money net;
    for (const Transaction& tx : log_) {
        if (tx.from == a && tx.to == b) net += tx.amount;
        if (tx.from == b && tx.to == a) net -= tx.amount;
    }
    return net;
}

Money Ledger::total() const {
    Money sum;
    for (const auto& [id, bal] : balances_) sum += bal;
    return sum;
}

}  // namespace gridflow::pay
