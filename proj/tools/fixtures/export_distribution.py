#!/usr/bin/env python3
"""Convert OpenDSS feeders into the gridbatch distribution JSON schema.

Every power-delivery element (lines, transformers, capacitors, reactors,
switches) and the source Thevenin impedance is exported as its primitive
admittance matrix taken straight from the OpenDSS engine, scaled to per-unit
with a per-node voltage base and a 1 MVA per-phase power base. Loads are
exported as constant-power wye or delta entries. The source EMF becomes
a separate internal slack bus ("source_int") behind the source impedance.

Alongside each JSON file a reference CSV is written with the node voltages
(magnitude p.u., angle deg) of an OpenDSS snapshot solve with all controls
disabled and every load forced to constant power:

    python3 export_distribution.py FEEDER_ROOT OUTDIR

FEEDER_ROOT must contain 13Bus/IEEE13Nodeckt.dss and 123Bus/IEEE123Master.dss
(OpenDSS distribution test cases). The European LV feeder is rebuilt from
pandapower's bundled copy. Requires opendssdirect.py, numpy and pandapower.
"""

import cmath
import json
import math
import sys
from pathlib import Path

import numpy as np
import opendssdirect as dss

SCHEMA = "gridbatch.distribution/1"
PHASES = {1: "a", 2: "b", 3: "c"}
SOURCE_BUS = "source_int"


def cmd(text):
    dss.Text.Command(text)
    err = dss.Error.Description()
    if err:
        raise RuntimeError(f"{text}: {err}")


def prepare_snapshot():
    # Constant-power loads everywhere, no controls, tight convergence.
    cmd("set controlmode=off")
    for name in dss.RegControls.AllNames() or []:
        if name != "NONE":
            cmd(f"regcontrol.{name}.enabled=no")
    for name in dss.CapControls.AllNames() or []:
        if name != "NONE":
            cmd(f"capcontrol.{name}.enabled=no")
    for name in dss.Loads.AllNames():
        cmd(f"load.{name}.model=1")
        cmd(f"load.{name}.vminpu=0.0")
        cmd(f"load.{name}.vlowpu=0.0")
        cmd(f"load.{name}.vmaxpu=100")
    cmd("set mode=snapshot")
    cmd("set loadmult=1")
    cmd("set tolerance=1e-12")
    cmd("set maxiterations=500")
    cmd("solve")
    if not dss.Solution.Converged():
        raise RuntimeError("OpenDSS snapshot did not converge")


def node_bases():
    bases = {}
    for bus in dss.Circuit.AllBusNames():
        dss.Circuit.SetActiveBus(bus)
        kv = dss.Bus.kVBase()
        if kv <= 0:
            raise RuntimeError(f"bus {bus} has no voltage base")
        for node in dss.Bus.Nodes():
            bases[f"{bus}.{node}"] = kv
    return bases


def element_terminals():
    names = dss.CktElement.BusNames()
    order = dss.CktElement.NodeOrder()
    nc = dss.CktElement.NumConductors()
    ids = []
    for t, bus in enumerate(names):
        bus_name = bus.split(".")[0].lower()
        for node in order[t * nc:(t + 1) * nc]:
            ids.append(None if node == 0 else f"{bus_name}.{node}")
    return ids


def yprim():
    raw = np.array(dss.CktElement.YPrim())
    n = int(round(math.sqrt(raw.size // 2)))
    y = (raw[0::2] + 1j * raw[1::2]).reshape(n, n)
    scale = max(1.0, float(np.abs(y).max()))
    if np.abs(y - y.T).max() > 1e-9 * scale:
        raise RuntimeError(f"{dss.CktElement.Name()}: non-reciprocal primitive admittance")
    return y


def reduce_terminals(ids, y):
    """Drop grounded conductors and merge conductors that land on the same node."""
    unique = []
    for node in ids:
        if node is not None and node not in unique:
            unique.append(node)
    pos = {node: k for k, node in enumerate(unique)}
    out = np.zeros((len(unique), len(unique)), dtype=complex)
    for a, na in enumerate(ids):
        if na is None:
            continue
        for b, nb in enumerate(ids):
            if nb is None:
                continue
            out[pos[na], pos[nb]] += y[a, b]
    return unique, out


def cmat(m):
    return {"re": [[float(v.real) for v in row] for row in m],
            "im": [[float(v.imag) for v in row] for row in m]}


def scale_pu(nodes, y, bases):
    vb = np.array([bases[n] for n in nodes])
    # Y[S] * Vb_i[kV] * Vb_j[kV] / Sbase[1 MVA]
    return y * np.outer(vb, vb)


def export_lines(bases):
    lines = []
    for name in dss.Lines.AllNames():
        dss.Circuit.SetActiveElement(f"Line.{name}")
        if not dss.CktElement.Enabled():
            continue
        ids = element_terminals()
        y = yprim()
        n = len(ids) // 2
        from_ids, to_ids = ids[:n], ids[n:]
        if None in from_ids or None in to_ids:
            raise RuntimeError(f"line {name} has grounded conductors")
        y_series = -y[:n, n:]
        y_sh_from = y[:n, :n] - y_series
        y_sh_to = y[n:, n:] - y_series
        vb_f = np.array([bases[i] for i in from_ids])
        vb_t = np.array([bases[i] for i in to_ids])
        entry = {
            "name": f"line.{name}",
            "from": from_ids,
            "to": to_ids,
            "y_series": cmat(y_series * np.outer(vb_f, vb_t)),
        }
        if np.abs(y_sh_from).max() > 0:
            entry["y_shunt_from"] = cmat(y_sh_from * np.outer(vb_f, vb_f))
        if np.abs(y_sh_to).max() > 0:
            entry["y_shunt_to"] = cmat(y_sh_to * np.outer(vb_t, vb_t))
        lines.append(entry)
    return lines


def export_elements(bases):
    elements = []
    for cls, names in (("transformer", dss.Transformers.AllNames()),
                       ("capacitor", dss.Capacitors.AllNames()),
                       ("reactor", dss.Reactors.AllNames())):
        for name in names or []:
            if name == "NONE":
                continue
            dss.Circuit.SetActiveElement(f"{cls}.{name}")
            if not dss.CktElement.Enabled():
                continue
            nodes, y = reduce_terminals(element_terminals(), yprim())
            elements.append({"name": f"{cls}.{name}", "nodes": nodes,
                             "y": cmat(scale_pu(nodes, y, bases))})
    return elements


def export_source(bases):
    dss.Vsources.First()
    if dss.Vsources.Count() != 1:
        raise RuntimeError("exactly one Vsource supported")
    name = dss.Vsources.Name()
    dss.Circuit.SetActiveElement(f"Vsource.{name}")
    ids = element_terminals()
    y = yprim()
    n = dss.CktElement.NumConductors()
    bus_nodes = ids[:n]
    if any(i is not None for i in ids[n:]):
        raise RuntimeError("Vsource second terminal must be grounded")
    ys = y[:n, :n]
    internal = [f"{SOURCE_BUS}.{k + 1}" for k in range(n)]
    for a, b in zip(internal, bus_nodes):
        bases[a] = bases[b]
    nodes = internal + bus_nodes
    full = np.block([[ys, -ys], [-ys, ys]])
    element = {"name": f"vsource.{name}", "nodes": nodes,
               "y": cmat(scale_pu(nodes, full, bases))}
    pu = dss.Vsources.PU()
    angle = dss.Vsources.AngleDeg()
    slack = []
    for k, node in enumerate(internal):
        v = cmath.rect(pu, math.radians(angle - 120.0 * k))
        slack.append({"node": node, "v": [v.real, v.imag]})
    return element, slack


def export_loads():
    loads = []
    for name in dss.Loads.AllNames():
        dss.Loads.Name(name)
        dss.Circuit.SetActiveElement(f"Load.{name}")
        bus = dss.CktElement.BusNames()[0]
        parts = bus.split(".")
        bus_name = parts[0].lower()
        nphases = dss.CktElement.NumPhases()
        nodes = [int(p) for p in parts[1:]] or [1, 2, 3][:nphases]
        if len(nodes) < nphases:
            nodes = nodes + [n for n in (1, 2, 3) if n not in nodes][:nphases - len(nodes)]
        s = complex(dss.Loads.kW(), dss.Loads.kvar()) / 1000.0  # MVA = p.u. on 1 MVA
        delta = dss.Loads.IsDelta()
        ids = [f"{bus_name}.{n}" for n in nodes]
        if delta:
            if nphases == 1:
                pairs = [(ids[0], ids[1])]
            elif nphases == 3:
                pairs = [(ids[0], ids[1]), (ids[1], ids[2]), (ids[2], ids[0])]
            else:
                raise RuntimeError(f"load {name}: unsupported delta phase count")
            for k, (p, q) in enumerate(pairs):
                loads.append({"name": f"load.{name}" + (f".{k + 1}" if len(pairs) > 1 else ""),
                              "kind": "delta", "nodes": [p, q],
                              "s": [s.real / len(pairs), s.imag / len(pairs)]})
        else:
            phase_ids = ids[:nphases]
            if len(ids) > nphases and nodes[nphases] != 0:
                raise RuntimeError(f"load {name}: ungrounded wye neutral not supported")
            for k, p in enumerate(phase_ids):
                loads.append({"name": f"load.{name}" + (f".{k + 1}" if nphases > 1 else ""),
                              "kind": "wye", "nodes": [p],
                              "s": [s.real / nphases, s.imag / nphases]})
    return loads


def export_current(label, outdir):
    prepare_snapshot()
    bases = node_bases()
    source_element, slack = export_source(bases)
    lines = export_lines(bases)
    elements = [source_element] + export_elements(bases)
    loads = export_loads()

    node_ids = [s["node"] for s in slack] + list(dss.Circuit.AllNodeNames())
    nodes = []
    for nid in node_ids:
        bus, ph = nid.rsplit(".", 1)
        if int(ph) not in PHASES:
            raise RuntimeError(f"node {nid}: only phases 1-3 supported")
        nodes.append({"id": nid, "bus": bus, "phase": PHASES[int(ph)],
                      "v_base_kv": bases[nid]})

    doc = {"schema": SCHEMA, "name": label, "s_base_mva": 1.0,
           "nodes": nodes, "slack": slack, "lines": lines,
           "elements": elements, "loads": loads}
    path = outdir / f"{label.lower()}.json"
    path.write_text(json.dumps(doc, indent=1))

    mags = dss.Circuit.AllBusMagPu()
    volts = dss.Circuit.AllBusVolts()
    ref = outdir / f"{label.lower()}_reference.csv"
    with ref.open("w") as out:
        out.write("node,vmag_pu,vang_deg\n")
        for k, nid in enumerate(dss.Circuit.AllNodeNames()):
            ang = math.degrees(math.atan2(volts[2 * k + 1], volts[2 * k]))
            out.write(f"{nid},{mags[k]!r},{ang!r}\n")
    print(f"{label}: {len(nodes)} node-phases, {len(lines)} lines, "
          f"{len(elements)} elements, {len(loads)} loads -> {path}")


def eulv_script(workdir):
    """Write an OpenDSS script for pandapower's IEEE European LV feeder."""
    import pandapower.networks as pn

    net = pn.ieee_european_lv_asymmetric("on_peak_566")
    names = {idx: str(n).lower() for idx, n in net.bus.name.items()}
    eg = net.ext_grid.iloc[0]
    tr = net.trafo.iloc[0]
    xhl = math.sqrt(tr.vk_percent ** 2 - tr.vkr_percent ** 2)
    x_r = 1.0 / eg.rx_max
    lines = [
        "clear",
        "set defaultbasefrequency=50",
        f"new circuit.eulv basekv={tr.vn_hv_kv} pu={eg.vm_pu} angle={eg.va_degree} "
        f"bus1={names[eg.bus]} mvasc3={eg.s_sc_max_mva} mvasc1={eg.s_sc_max_mva} "
        f"x1r1={x_r} x0r0={x_r}",
        f"new transformer.tr1 phases=3 windings=2 buses=[{names[tr.hv_bus]} {names[tr.lv_bus]}] "
        f"conns=[delta wye] kvs=[{tr.vn_hv_kv} {tr.vn_lv_kv}] kvas=[{tr.sn_mva * 1000} {tr.sn_mva * 1000}] "
        f"%rs=[{tr.vkr_percent / 2} {tr.vkr_percent / 2}] xhl={xhl}",
    ]
    for _, ln in net.line.iterrows():
        lines.append(
            f"new line.{ln['name'].lower()} phases=3 bus1={names[ln.from_bus]} bus2={names[ln.to_bus]} "
            f"r1={ln.r_ohm_per_km} x1={ln.x_ohm_per_km} r0={ln.r0_ohm_per_km} x0={ln.x0_ohm_per_km} "
            f"c1=0 c0=0 length={ln.length_km} units=km")
    vln = tr.vn_lv_kv / math.sqrt(3)
    for _, ld in net.asymmetric_load.iterrows():
        for k, ph in enumerate("abc"):
            p = ld[f"p_{ph}_mw"] * 1000
            q = ld[f"q_{ph}_mvar"] * 1000
            if p == 0 and q == 0:
                continue
            lines.append(
                f"new load.{ld['name'].lower()}_{ph} phases=1 bus1={names[ld.bus]}.{k + 1} conn=wye "
                f"kv={vln} kw={p} kvar={q} model=1")
    lines.append(f"set voltagebases=[{tr.vn_hv_kv} {tr.vn_lv_kv}]")
    lines.append("calcvoltagebases")
    path = workdir / "eulv.dss"
    path.write_text("\n".join(lines) + "\n")
    return path


def find_feeder(root, folder, filename):
    # Redirected files are case-sensitive on Linux; take the first folder
    # whose master file resolves all of its redirects.
    for path in sorted(root.iterdir()):
        if path.name.lower() != folder:
            continue
        for f in path.iterdir():
            if f.name.lower() == filename:
                redirects = [ln.split()[1] for ln in f.read_text().splitlines()
                             if ln.lower().startswith("redirect")]
                if all((path / r).exists() for r in redirects):
                    return f
    raise FileNotFoundError(f"{folder}/{filename} under {root}")


def main():
    root = Path(sys.argv[1])
    outdir = Path(sys.argv[2])
    outdir.mkdir(parents=True, exist_ok=True)

    cmd(f"compile [{find_feeder(root, '13bus', 'ieee13nodeckt.dss')}]")
    export_current("IEEE13", outdir)

    cmd(f"compile [{find_feeder(root, '123bus', 'ieee123master.dss')}]")
    export_current("IEEE123", outdir)

    script = eulv_script(root)
    cmd(f"compile [{script}]")
    export_current("EULV", outdir)


if __name__ == "__main__":
    main()
