package toy.meters;

/**
 * Accepts numeric samples and reports aggregates.
 */
public interface Meter {

    /**
     * Records a new sample value into the meter.
     */
    void record(long value);

    /**
     * Returns an immutable snapshot of the meter state.
     */
    String snapshot();

    /** Returns the measurement unit of the meter. */
    String unit();
}
