"""Benchmark topology generators: linear, diamond and star micro-benchmarks,
plus the two production-style topologies shipped as fixture files."""

from __future__ import annotations

from ..topology import Component, Kind, ResourceVector, Topology

DEFAULT_DEMAND = ResourceVector(mem=512.0, cpu=10.0)


def _comp(name: str, kind: Kind, parallelism: int, demand: ResourceVector) -> Component:
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    return Component(name, kind, parallelism, demand.cpu, demand.mem, demand.bw)


def gen_linear(stages: int, parallelism: int = 1, demand: ResourceVector = DEFAULT_DEMAND) -> Topology:
    """spout -> bolt1 -> ... -> bolt{stages-1}, every component ``parallelism`` wide."""
    if stages < 2:
        raise ValueError(f"a linear topology needs at least 2 stages, got {stages}")
    names = ["spout"] + [f"bolt{i}" for i in range(1, stages)]
    comps = [_comp(names[0], Kind.SPOUT, parallelism, demand)]
    comps += [_comp(n, Kind.BOLT, parallelism, demand) for n in names[1:]]
    edges = list(zip(names, names[1:]))
    return Topology(f"linear-{stages}x{parallelism}", tuple(comps), tuple(edges))


def gen_diamond(width: int, parallelism: int = 1, demand: ResourceVector = DEFAULT_DEMAND) -> Topology:
    """spout fans out to ``width`` parallel bolts which all feed one sink bolt."""
    if width < 1:
        raise ValueError(f"diamond width must be >= 1, got {width}")
    mids = [f"bolt{i}" for i in range(1, width + 1)]
    comps = [_comp("spout", Kind.SPOUT, parallelism, demand)]
    comps += [_comp(m, Kind.BOLT, parallelism, demand) for m in mids]
    comps.append(_comp("sink", Kind.BOLT, parallelism, demand))
    edges = [("spout", m) for m in mids] + [(m, "sink") for m in mids]
    return Topology(f"diamond-{width}x{parallelism}", tuple(comps), tuple(edges))


def gen_star(spouts: int, sinks: int, parallelism: int = 1, demand: ResourceVector = DEFAULT_DEMAND) -> Topology:
    """``spouts`` spouts feed one center bolt, which feeds ``sinks`` sink bolts."""
    if spouts < 1 or sinks < 1:
        raise ValueError("a star needs at least one spout and one sink")
    sp = [f"spout{i}" for i in range(1, spouts + 1)]
    sk = [f"sink{i}" for i in range(1, sinks + 1)]
    comps = [_comp(s, Kind.SPOUT, parallelism, demand) for s in sp]
    comps.append(_comp("center", Kind.BOLT, parallelism, demand))
    comps += [_comp(s, Kind.BOLT, parallelism, demand) for s in sk]
    edges = [(s, "center") for s in sp] + [("center", s) for s in sk]
    return Topology(f"star-{spouts}x{sinks}x{parallelism}", tuple(comps), tuple(edges))


def gen_pageload() -> Topology:
    from .fixtures import load_fixture_topology

    return load_fixture_topology("pageload")


def gen_processing() -> Topology:
    from .fixtures import load_fixture_topology

    return load_fixture_topology("processing")


GENERATORS = {
    "linear": gen_linear,
    "diamond": gen_diamond,
    "star": gen_star,
}
NAMED = {
    "pageload": gen_pageload,
    "processing": gen_processing,
}


def parse_generator(text: str, demand: ResourceVector | None = None) -> Topology:
    """Build a topology from ``name:arg,arg`` such as ``linear:4,4`` or ``pageload``."""
    name, _, args = text.partition(":")
    name = name.strip().lower()
    if name in NAMED:
        if args:
            raise ValueError(f"{name} takes no parameters")
        return NAMED[name]()
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; expected one of {sorted(GENERATORS) + sorted(NAMED)}")
    try:
        params = [int(a) for a in args.split(",") if a.strip()]
    except ValueError:
        raise ValueError(f"generator parameters must be integers: {args!r}") from None
    kwargs = {} if demand is None else {"demand": demand}
    return GENERATORS[name](*params, **kwargs)


def is_generator_spec(text: str) -> bool:
    name = text.partition(":")[0].strip().lower()
    return name in GENERATORS or name in NAMED
