/** Hover tooltip: pure content formatting plus a small DOM handle. */

export interface RegionDatum {
  name: string;
  party: string;
  votes: string | null;
  seats: string | null;
}

export function regionDatumFrom(element: Element): RegionDatum | null {
  const name = element.getAttribute("data-name");
  const party = element.getAttribute("data-party");
  if (!name || !party) {
    return null;
  }
  return {
    name,
    party,
    votes: element.getAttribute("data-votes"),
    seats: element.getAttribute("data-seats"),
  };
}

export function formatRegionTooltip(datum: RegionDatum): string {
  let text = `${datum.name} — ${datum.party}`;
  if (datum.seats !== null) {
    text += ` · seats ${datum.seats}`;
  }
  if (datum.votes !== null) {
    text += ` · votes ${datum.votes}`;
  }
  return text;
}

export function formatPointTooltip(element: Element): string | null {
  const year = element.getAttribute("data-year");
  const predicted = element.getAttribute("data-predicted");
  if (year && predicted !== null) {
    return `${year}: predicted ${Number(predicted).toFixed(1)}`;
  }
  const value = element.getAttribute("data-value");
  const label = element.getAttribute("data-label");
  if (label && value !== null) {
    return `${label}: ${value}`;
  }
  if (year && value !== null) {
    const estimated = element.getAttribute("data-estimated") ? " (estimated)" : "";
    return `${year}: ${value}${estimated}`;
  }
  const party = element.getAttribute("data-party");
  const win = element.getAttribute("data-win");
  if (party && year && win !== null) {
    return win === "1" ? `${party} won in ${year}` : `${party} did not win in ${year}`;
  }
  return null;
}

export interface TooltipHandle {
  element: HTMLDivElement;
  show(x: number, y: number, text: string): void;
  hide(): void;
}

export function createTooltip(container: HTMLElement): TooltipHandle {
  const box = container.ownerDocument.createElement("div");
  box.className = "tooltip";
  box.style.position = "absolute";
  box.style.pointerEvents = "none";
  box.style.display = "none";
  container.appendChild(box);
  return {
    element: box,
    show(x, y, text) {
      box.style.left = `${x + 12}px`;
      box.style.top = `${y + 12}px`;
      box.textContent = text;
      box.style.display = "block";
    },
    hide() {
      box.style.display = "none";
    },
  };
}

/**
 * Delegated hover wiring: any descendant with tooltip-worthy data
 * attributes shows the box, everything else hides it.
 */
export function attachHover(pane: HTMLElement, tooltip: TooltipHandle): void {
  pane.addEventListener("mousemove", (event) => {
    const target = (event.target as Element | null)?.closest(
      "[data-region-id], .mark, .prediction",
    );
    if (!target) {
      tooltip.hide();
      return;
    }
    const region = regionDatumFrom(target);
    const text = region ? formatRegionTooltip(region) : formatPointTooltip(target);
    if (text) {
      tooltip.show(event.pageX ?? 0, event.pageY ?? 0, text);
    } else {
      tooltip.hide();
    }
  });
  pane.addEventListener("mouseleave", () => tooltip.hide());
}
