"""A complete auction session, end to end.

Six bidders ask a cloud provider for bundles of two VM types.  The
allocation and critical-value payments are computed twice — once in
plaintext as a reference, once inside the two-circuit protocol — and the
protocol run must reproduce the plaintext result bit for bit while no
single computing party ever sees the bids.
"""

import random

from dualgc import AuctionConfig, gate_count, oracle_run, run_session


def main():
    config = AuctionConfig(vm_types=2, capacities=(3, 3), weights=(1, 2),
                           width=16)
    rng = random.Random("demo-3")
    bids = [tuple((rng.randint(0, 3), rng.randint(0, 100)) for _ in range(2))
            for _ in range(6)]

    print("=== The auction ===")
    print(f"{config.vm_types} VM types, capacities {config.capacities}, "
          f"weights {config.weights}, {config.width}-bit arithmetic")
    for u, bid in enumerate(bids):
        wants = ", ".join(f"{k} of type {i}" for i, (k, _) in enumerate(bid))
        print(f"  bidder {u}: wants {wants}; bids "
              + ", ".join(str(b) for _, b in bid))

    print("\n=== Plaintext reference ===")
    oracle = oracle_run(config, bids)
    print(f"allocations: {oracle.allocations}")
    print(f"payments   : {oracle.payments(config)}")

    print("\n=== Protocol run ===")
    print(f"compiled circuit: {gate_count(config, len(bids))} gates")
    result = run_session(config, bids, s=10, seed=7)
    print(f"status: {result.status}")
    for name, decision in sorted(result.decisions.items()):
        print(f"  {name:<11} verdict: {decision.status}")

    print(f"\nprotocol allocations: {result.result.allocations}")
    print(f"protocol payments   : {result.result.payments(config)}")
    print(f"bit-exact match with plaintext: {result.result == oracle}")

    stats = result.transcript.measure()
    print(f"\ntraffic: {stats['messages_total']} messages, "
          f"{stats['bytes_total']:,} bytes")
    for phase, n in stats["bytes_by_phase"].items():
        seconds = stats["wall_time_by_phase"].get(phase, 0.0)
        print(f"  {phase:<8} {n:>12,} bytes   {seconds:6.2f}s")


if __name__ == "__main__":
    main()
