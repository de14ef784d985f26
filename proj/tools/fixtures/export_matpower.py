#!/usr/bin/env python3
"""Export pandapower's bundled transmission cases as MATPOWER-style .m files.

Writes the bus/gen/branch/baseMVA subset the C++ parser understands, plus a
reference CSV (bus id, magnitude p.u., angle deg) solved by pandapower with
flat start and no Q-limit enforcement. pandapower solves transformers with
its T model while the .m branch rows carry the π equivalent, so solutions of
the .m file differ from the CSV where transformers have magnetizing current
(up to ~1e-3 deg on case118).

    python3 export_matpower.py OUTDIR

Requires pandapower (pip install pandapower).
"""

import math
import sys
from pathlib import Path

import pandapower as pp
import pandapower.networks as pn
from pandapower.converter.matpower.to_mpc import to_mpc

CASES = {
    "case118": pn.case118,
    "case1354pegase": pn.case1354pegase,
    # Public 2224-bus GB equivalent; stands in for the unpublished variant.
    "gb2224": pn.GBnetwork,
}


def fmt(x):
    if math.isnan(x):
        return "0"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def write_matrix(out, name, rows, ncols):
    out.write(f"mpc.{name} = [\n")
    for r in rows:
        out.write("\t" + "\t".join(fmt(v) for v in r[:ncols]) + ";\n")
    out.write("];\n\n")


def export(name, factory, outdir):
    net = factory()
    mpc = to_mpc(net, init="flat")["mpc"]
    gen = mpc["gen"].copy()
    # mBase is sometimes missing in the export
    gen[:, 6] = [mpc["baseMVA"] if math.isnan(v) else v for v in gen[:, 6]]

    path = outdir / f"{name}.m"
    with path.open("w") as out:
        out.write(f"function mpc = {name}\n")
        out.write(f"% {name}: exported from pandapower's bundled case data.\n")
        out.write("% Columns follow MATPOWER case format version 2.\n\n")
        out.write("mpc.version = '2';\n\n")
        out.write(f"mpc.baseMVA = {fmt(mpc['baseMVA'])};\n\n")
        out.write("%% bus data\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n")
        write_matrix(out, "bus", mpc["bus"], 13)
        out.write("%% generator data\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n")
        write_matrix(out, "gen", gen, 10)
        out.write("%% branch data\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\n")
        write_matrix(out, "branch", mpc["branch"], 13)

    pp.runpp(net, init="flat", calculate_voltage_angles=True,
             tolerance_mva=1e-10, max_iteration=30)
    # pandapower bus index -> ppc bus number (1-based, same order as export)
    lookup = net._pd2ppc_lookups["bus"]
    ref = outdir / f"{name}_reference.csv"
    with ref.open("w") as out:
        out.write("bus,vm_pu,va_deg\n")
        rows = []
        for idx, r in net.res_bus.iterrows():
            rows.append((int(mpc["bus"][lookup[idx], 0]), float(r.vm_pu), float(r.va_degree)))
        for bus_id, vm, va in sorted(rows):
            out.write(f"{bus_id},{vm!r},{va!r}\n")
    print(f"{name}: {len(mpc['bus'])} buses, {len(mpc['branch'])} branches -> {path}")


def main():
    outdir = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, factory in CASES.items():
        export(name, factory, outdir)


if __name__ == "__main__":
    main()
