// Rolling time windows behind the live readouts (manipulability and position
// error per arm over the last 30 s).

export class RollingSeries {
  private ts: number[] = [];
  private vs: number[] = [];

  constructor(readonly windowSec = 30) {}

  push(t: number, value: number): void {
    this.ts.push(t);
    this.vs.push(value);
    const cutoff = t - this.windowSec;
    let drop = 0;
    while (drop < this.ts.length && this.ts[drop] < cutoff) drop++;
    if (drop > 0) {
      this.ts = this.ts.slice(drop);
      this.vs = this.vs.slice(drop);
    }
  }

  get length(): number {
    return this.vs.length;
  }

  latest(): number | undefined {
    return this.vs[this.vs.length - 1];
  }

  min(): number {
    return this.vs.length ? Math.min(...this.vs) : 0;
  }

  max(): number {
    return this.vs.length ? Math.max(...this.vs) : 0;
  }

  /** polyline points scaled into a w x h box, newest at the right edge. */
  polyline(w: number, h: number): Array<[number, number]> {
    if (this.ts.length < 2) return [];
    const t1 = this.ts[this.ts.length - 1];
    const t0 = t1 - this.windowSec;
    const lo = this.min();
    const span = Math.max(this.max() - lo, 1e-12);
    return this.ts.map((t, i) => [
      ((t - t0) / this.windowSec) * w,
      h - ((this.vs[i] - lo) / span) * h,
    ]);
  }
}

export interface ArmReadout {
  manip: RollingSeries;
  posErr: RollingSeries;
  updates: number;
}

export class ReadoutBoard {
  readonly arms = new Map<string, ArmReadout>();

  observe(armId: string, t: number, manip: number, posErr: number): void {
    let arm = this.arms.get(armId);
    if (!arm) {
      arm = { manip: new RollingSeries(), posErr: new RollingSeries(), updates: 0 };
      this.arms.set(armId, arm);
    }
    arm.manip.push(t, manip);
    arm.posErr.push(t, posErr);
    arm.updates += 1;
  }
}
