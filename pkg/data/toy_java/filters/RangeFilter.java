package toy.filters;

/** Keeps only events whose value falls inside a closed range. */
public class RangeFilter extends EventFilter {

    private final int lower;
    private final int upper;

    public RangeFilter(int lower, int upper) {
        this.lower = lower;
        this.upper = upper;
    }

    /**
     * Checks whether the range filter accepts the given event within bounds.
     */
    @Override
    public boolean accepts(Event event) {
        boolean bounds = event.value() >= lower && event.value() <= upper;
        return bounds;
    }

    public boolean accepts(Event event, int slack) {
        return event.value() >= lower - slack && event.value() <= upper + slack;
    }

    @Override
    public int priority() {
        return 5;
    }

    /**
     * Returns a short explanation of the range filter decision and bounds.
     */
    @Override
    public String explain() {
        return "range=[" + lower + "," + upper + "]";
    }
}
