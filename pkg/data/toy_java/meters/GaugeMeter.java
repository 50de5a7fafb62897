package toy.meters;

/**
 * Remembers only the most recent sample.
 */
public interface GaugeMeter extends Meter {

    /**
     * Records a new sample value into the gauge meter.
     */
    void record(long value);

    /**
     * Returns an immutable snapshot of the gauge meter state.
     */
    String snapshot();

    /** Returns the measurement unit of the gauge meter. */
    String unit();
}
