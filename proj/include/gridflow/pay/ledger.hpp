#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridflow/pay/money.hpp"

namespace gridflow::pay {

struct Transaction {
    std::string from;
    std::string to;
    Money amount;  // positive
    Money fee;     // nonnegative, accrues to the fee sink
    double at = 0.0;
};

/// Account balances plus the append-only transaction log. Transfers are
/// limited by the sender's balance and atomic: a rejected transaction leaves
/// every balance untouched. Fees route to a designated fee-sink account so
/// the total over all balances is invariant.
class Ledger {
public:
    explicit Ledger(std::string fee_sink = "fees");

    const std::string& fee_sink() const { return fee_sink_; }

    void open_account(const std::string& id, Money initial = Money());
    bool has_account(const std::string& id) const { return balances_.count(id) > 0; }
    Money balance(const std::string& id) const;

    void apply(const Transaction& tx);

    /// Net signed delta to the account from transactions with begin <= at <= end.
    Money net_position(const std::string& id, double begin, double end) const;

    /// Accumulated payment flow a -> b (amounts only; fees are losses).
    /// Antisymmetric by construction.
    Money flow_between(const std::string& a, const std::string& b) const;

    Money total() const;

    const std::map<std::string, Money>& accounts() const { return balances_; }
    const std::vector<Transaction>& log() const { return log_; }

private:
    std::string fee_sink_;
    std::map<std::string, Money> balances_;
    std::vector<Transaction> log_;
};

}  // namespace gridflow::pay
