/** Accuracy-rejection curve: CSV parsing and SVG coordinate mapping. */

export interface ArcPoint {
  rejectionRate: number;
  accuracy: number;
}

/** Parse the service's `rejection_rate,accuracy` CSV. */
export function parseArcCsv(csv: string): ArcPoint[] {
  const lines = csv
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0 || lines[0] !== "rejection_rate,accuracy") {
    throw new Error("malformed ARC CSV: missing header");
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    const rejectionRate = Number(parts[0]);
    const accuracy = Number(parts[1]);
    if (parts.length !== 2 || Number.isNaN(rejectionRate) || Number.isNaN(accuracy)) {
      throw new Error(`malformed ARC CSV at data row ${i + 1}`);
    }
    return { rejectionRate, accuracy };
  });
}

export interface ChartFrame {
  width: number;
  height: number;
  pad: number;
}

/** Map one curve point into pixel space (y axis flipped, unit domain). */
export function toPixel(p: ArcPoint, frame: ChartFrame): { x: number; y: number } {
  const innerW = frame.width - 2 * frame.pad;
  const innerH = frame.height - 2 * frame.pad;
  return {
    x: frame.pad + p.rejectionRate * innerW,
    y: frame.pad + (1 - p.accuracy) * innerH,
  };
}

/** SVG `points` attribute for a polyline through the curve. */
export function polylinePoints(points: ArcPoint[], frame: ChartFrame): string {
  return points
    .map((p) => {
      const { x, y } = toPixel(p, frame);
      return `${round3(x)},${round3(y)}`;
    })
    .join(" ");
}

function round3(v: number): number {
  return Math.round(v * 1000) / 1000;
}
