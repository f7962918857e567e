class TaxRules {
public:
  int dummy(){
    return 0;
  }
};
class Order {
public:
  double total(double price){
    double tax = price * 2;
    return tax;
  }
};
