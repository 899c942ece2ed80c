import * as path from "node:path";

export const FIXTURES = path.join(__dirname, "..", "..", "test", "fixtures");

export interface Shape {
  tag: string;
  attrs: Record<string, string>;
}

// pull every svg element carrying the requested data-kind, with attributes
export function shapesOf(svg: string, kind: string): Shape[] {
  const out: Shape[] = [];
  const element = /<(\w+)\b([^>]*?)\/>/g;
  let match: RegExpExecArray | null;
  while ((match = element.exec(svg)) !== null) {
    const attrs: Record<string, string> = {};
    const attrPattern = /([\w-]+)="([^"]*)"/g;
    let attr: RegExpExecArray | null;
    while ((attr = attrPattern.exec(match[2])) !== null) {
      attrs[attr[1]] = attr[2];
    }
    if (attrs["data-kind"] === kind) {
      out.push({ tag: match[1], attrs });
    }
  }
  return out;
}
