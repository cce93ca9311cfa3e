"""Interval ladder and prime partitions."""
from __future__ import annotations

import pytest

from dioapprox import ParameterRejected, PartitionExhausted
from dioapprox.additive import builtin
from dioapprox.ladder import (
    PartitionRequest,
    build_partition,
    check_v0,
    extend_ladder,
    ladder_depth_for,
    subintervals,
)


def test_ladder_example():
    ladder = extend_ladder(0.5, 1, 3)
    assert [float(v) for v in ladder.values] == [0.5, 0.25, 0.1875, 0.15234375]
    assert ladder.depth == 3
    assert ladder.interval(1) == (ladder.values[2], ladder.values[1])


def test_ladder_extension_keeps_prefix():
    short = extend_ladder(0.3, 0.5, 4)
    long = short.extended(9)
    assert long.values[:5] == short.values
    assert long.depth == 9


@pytest.mark.parametrize("v0, xi, J", [(1, 1, 3), (0, 1, 3), (0.5, 0, 3), (0.5, 1, -1)])
def test_ladder_rejects(v0, xi, J):
    with pytest.raises(ParameterRejected):
        extend_ladder(v0, xi, J)


def test_ladder_asymptotics():
    J = 10_000
    # xi = 1: v_J ~ 1/J
    v = extend_ladder(0.5, 1, J).values[-1]
    assert 0.9 <= float(v) * J <= 1.1
    # xi = 1/2: v_J ~ (J/2)^-2
    v = extend_ladder(0.5, 0.5, J).values[-1]
    assert 0.8 <= float(v) * J * J / 4 <= 1.2


def test_ladder_depth_for():
    assert ladder_depth_for(0.5, 1, 0.2) == 2
    assert ladder_depth_for(0.5, 1, 0.6) == 0


def test_subintervals_tile_from_the_top():
    windows = subintervals(0.01, 0.006, 0.45)
    assert windows
    assert windows[0][1] == 0.01
    for (bottom, top), (next_bottom, next_top) in zip(windows, windows[1:]):
        assert next_top == bottom
    for bottom, top in windows:
        assert bottom < top
        assert abs((top - bottom) - top**1.45) < 1e-12
    assert all(0.006 <= bottom for bottom, _ in windows[:-1])
    assert windows[-1][0] < 0.006 < windows[-1][1]


def test_subintervals_cover_the_whole_interval():
    # (0.0645, 0.1] then (0.0457, 0.0645]
    windows = subintervals(0.1, 0.05, 0.45)
    assert len(windows) == 2
    assert 0.045 < windows[-1][0] < 0.05


def test_check_v0_example(totient_log):
    request = PartitionRequest((totient_log,), K=1, J=3, xi=0.2)
    assert check_v0(request, 0.05).passed


def test_check_v0_violations(arith, totient_log, sigma_log):
    request = PartitionRequest((totient_log,), K=1, J=3, xi=0.3)
    assert check_v0(request, 0.1).codes == ["v0c1"]
    assert check_v0(request, 0.6).codes[0] == "v0a"
    assert check_v0(request, 1.5).codes == ["domain"]

    request = PartitionRequest((sigma_log,), K=2, J=3, xi=0.3)
    # sigma_log(2) = log(3/2) is below 0.45
    assert "v0b" in check_v0(request, 0.45, arith).codes

    request = PartitionRequest((totient_log, sigma_log), K=1, J=0, xi=0.1)
    assert request.A == 2
    assert "v0c2" in check_v0(request, 0.01).codes


def test_request_rejects_large_xi(totient_log, sigma_log):
    with pytest.raises(ParameterRejected):
        PartitionRequest((totient_log, sigma_log), K=1, J=3, xi=0.3)
    with pytest.raises(ParameterRejected):
        PartitionRequest((), K=1, J=3, xi=0.1)


def test_partition_too_coarse_v0(arith, totient_log):
    request = PartitionRequest((totient_log, totient_log), K=1, J=3, xi=0.3)
    with pytest.raises(ParameterRejected):
        build_partition(request, 0.1, arith)
    # level 0 then holds two sub-intervals, both taken by the first function
    with pytest.raises(PartitionExhausted) as info:
        build_partition(request, 0.1, arith, strict=False)
    assert info.value.context["level"] == 0


def test_partition_example(arith, totient_log):
    request = PartitionRequest((totient_log,), K=1, J=3, xi=0.3)
    partition = build_partition(request, 0.009, arith)
    assert len(partition.sets[0]) == 4
    assert len(partition.spares[0]) == 4
    assert partition.validate().passed
    for j, p in enumerate(partition.column(0)):
        lower, upper = partition.ladder.interval(j)
        assert lower < totient_log.prime_value(p) <= upper


def test_partition_depth_zero(arith, totient_log):
    request = PartitionRequest((totient_log,), K=1, J=0, xi=0.1)
    partition = build_partition(request, 0.01, arith)
    assert partition.depth == 0
    assert len(partition.sets[0]) == 1


def test_partition_disjoint_across_functions(arith):
    f, g = builtin("totient_log"), builtin("totient_log")
    request = PartitionRequest((f, g), K=1, J=5, xi=0.1)
    assert request.A == 1
    partition = build_partition(request, 0.01, arith)
    assert partition.validate().passed
    chosen = [p for column in partition.sets + partition.spares for p in column]
    assert len(chosen) == len(set(chosen)) == 4 * 6
    residual = partition.residual_primes(2000, arith)
    assert not set(residual) & set(chosen)
    assert all(p > 1 for p in residual)
    divergence = partition.residual_divergence()
    assert len(divergence) == 2
    assert all(spare > 0 and floor > 0 for spare, floor in divergence)


def test_partition_records(arith, totient_log):
    request = PartitionRequest((totient_log,), K=1, J=2, xi=0.1)
    partition = build_partition(request, 0.01, arith)
    rows = partition.records()
    assert [(row["i"], row["j"]) for row in rows] == [(0, 0), (0, 1), (0, 2)]
    assert rows[0]["prime"] == partition.sets[0][0]
