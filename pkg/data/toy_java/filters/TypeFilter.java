package toy.filters;

/** Keeps only events whose name matches a wanted kind. */
public class TypeFilter extends EventFilter {

    private final String kind;

    public TypeFilter(String kind) {
        this.kind = kind;
    }

    /**
     * Checks whether the type filter accepts the given event kind.
     */
    @Override
    public boolean accepts(Event event) {
        return kind.equals(event.name());
    }

    @Override
    public int priority() {
        return 10;
    }

    /**
     * Returns a short explanation of the type filter decision and kind.
     */
    @Override
    public String explain() {
        return "type=" + kind;
    }
}
